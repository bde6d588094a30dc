#include <random>

#include "doctest.h"
#include "fogcast/core.hpp"

using namespace fogcast;

namespace {

Packet P(std::set<MapId> c) { return Packet::of(std::move(c), 10); }

RoadNetwork line3() {
  return RoadNetwork({{"a", 0, 0}, {"b", 1, 0}, {"c", 2, 0}},
                     {{"ab", "a", "b"}, {"bc", "b", "c"}}, {"b"});
}

}  // namespace

TEST_CASE("map ids") {
  CHECK(static_id("e1") == "s:e1");
  CHECK(dynamic_id("e1", 7) == "d:e1@7");
  auto p = parse_map_id("d:e1@7");
  REQUIRE(p);
  CHECK(p->dynamic);
  CHECK(p->segment == "e1");
  CHECK(p->slot == 7);
  auto s = parse_map_id("s:x");
  REQUIRE(s);
  CHECK_FALSE(s->dynamic);
  CHECK_FALSE(parse_map_id("q:x"));
}

TEST_CASE("xor_combine") {
  auto r = xor_combine(Packet::source("m1", 5), Packet::source("m2", 8));
  CHECK(r.components() == std::set<MapId>{"m1", "m2"});
  CHECK(r.size() == 8);
  CHECK_FALSE(r.is_source());

  auto back = xor_combine(P({"m1", "m2"}), P({"m1"}));
  CHECK(back.components() == std::set<MapId>{"m2"});
  CHECK(back.is_source());

  try {
    xor_combine(P({"m2", "m1"}), P({"m1", "m2"}));
    FAIL("expected EmptyResult");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyResult);
  }
}

TEST_CASE("packet identity ignores order") {
  CHECK(P({"m1", "m2"}) == P({"m2", "m1"}));
  CHECK_THROWS_AS(Packet::coded({"m1"}, 1), Error);
  CHECK_THROWS_AS(Packet::of({}, 1), Error);
  CHECK(P({"m1", "m2"}).label() == "m1^m2");
}

TEST_CASE("decode_closure examples") {
  std::vector<Packet> ex1{P({"m1", "m2"})};
  CHECK(decode_closure({"m1"}, ex1) == std::set<MapId>{"m1", "m2"});
  std::vector<Packet> ex2{P({"m2", "m1"}), P({"m1", "m3"})};
  CHECK(decode_closure({"m3"}, ex2) == std::set<MapId>{"m1", "m2", "m3"});
  CHECK(decode_closure({}, {}).empty());
  std::vector<Packet> src{P({"m4"})};
  CHECK(decode_closure({}, src) == std::set<MapId>{"m4"});
}

TEST_CASE("decode_closure properties") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> node(1, 6);
  auto id = [](int k) { return "m" + std::to_string(k); };
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Packet> packets;
    const int count = node(rng);
    for (int i = 0; i < count; ++i) {
      std::set<MapId> c{id(node(rng)), id(node(rng))};
      if (node(rng) > 4) c.insert(id(node(rng)));
      packets.push_back(P(c));
    }
    std::set<MapId> prior{id(node(rng))};
    auto base = decode_closure(prior, packets);
    CHECK(decode_closure(base, packets) == base);

    auto bigger_prior = prior;
    bigger_prior.insert(id(node(rng)));
    auto grown = decode_closure(bigger_prior, packets);
    CHECK(std::includes(grown.begin(), grown.end(), base.begin(), base.end()));

    auto more = packets;
    more.push_back(P({id(node(rng)), id(node(rng))}));
    auto grown2 = decode_closure(prior, more);
    CHECK(std::includes(grown2.begin(), grown2.end(), base.begin(), base.end()));

    // Order of packets never matters.
    std::shuffle(packets.begin(), packets.end(), rng);
    CHECK(decode_closure(prior, packets) == base);
  }
}

TEST_CASE("binary chain decodes end to end") {
  for (int len = 2; len <= 8; ++len) {
    std::vector<Packet> chain;
    for (int k = 1; k < len; ++k) {
      chain.push_back(P({"m" + std::to_string(k), "m" + std::to_string(k + 1)}));
    }
    auto out = decode_closure({"m1"}, chain);
    CHECK(out.contains("m" + std::to_string(len)));
  }
}

TEST_CASE("xor_combine commutative and associative on sets") {
  auto a = P({"m1", "m2"});
  auto b = P({"m2", "m3"});
  auto c = P({"m4"});
  CHECK(xor_combine(a, b) == xor_combine(b, a));
  CHECK(xor_combine(xor_combine(a, b), c) == xor_combine(a, xor_combine(b, c)));
}

TEST_CASE("knowledge set matches closure") {
  KnowledgeSet k("c1");
  k.add_prior("m3");
  k.receive_broadcast(P({"m1", "m2"}));
  CHECK_FALSE(k.knows("m2"));
  k.receive_broadcast(P({"m1", "m3"}));
  CHECK(k.knows("m1"));
  CHECK(k.knows("m2"));
  k.receive_cellular(P({"m9"}));
  std::vector<Packet> all = k.received_broadcast();
  all.insert(all.end(), k.received_cellular().begin(), k.received_cellular().end());
  CHECK(k.decoded() == decode_closure(k.prior(), all));
}

TEST_CASE("road network") {
  auto net = line3();
  CHECK(net.incident("b") == std::vector<SegmentId>{"ab", "bc"});
  CHECK(net.rsu_segments("b") == std::vector<SegmentId>{"ab", "bc"});
  CHECK(net.segment_between("a", "b") == std::optional<SegmentId>("ab"));
  CHECK_FALSE(net.segment_between("a", "c"));
  CHECK(net.other_end("ab", "a") == "b");
  CHECK(net.hop_distances("a").at("c") == 2);
  CHECK(net.connected());
  CHECK_THROWS_AS(net.segment("zz"), Error);

  CHECK_THROWS_AS(RoadNetwork({{"a", 0, 0}}, {{"ab", "a", "b"}}, {}), Error);
  CHECK_THROWS_AS(RoadNetwork({{"a", 0, 0}}, {}, {"x"}), Error);
  CHECK_FALSE(RoadNetwork({{"a", 0, 0}, {"b", 0, 0}}, {}, {}).connected());
}

TEST_CASE("trip plans") {
  auto net = line3();
  auto plan = make_plan(net, "c1", {"a", "b", "c"}, {0, 2, 4});
  CHECK(plan.segments == std::vector<SegmentId>{"ab", "bc"});
  CHECK(plan.segment_times == std::vector<Slot>{0, 2});
  CHECK(plan.start_time() == 0);
  CHECK(plan.end_time() == 4);
  CHECK_NOTHROW(validate_plan(plan, net));

  CHECK_THROWS_AS(make_plan(net, "c2", {"a", "c"}, {0, 1}), Error);
  CHECK_THROWS_AS(make_plan(net, "c3", {"a", "b"}, {3, 3}), Error);
  CHECK_THROWS_AS(make_plan(net, "c4", {"a", "b", "c"}, {0, 2, 4}, {0, 5}), Error);
}

TEST_CASE("catalog sizes") {
  MapDataCatalog cat;
  cat.set_default_static_size(100);
  cat.set_static_size("e1", 300);
  cat.set_dynamic_size("e1", 20);
  CHECK(cat.item_size(static_id("e1")) == 300);
  CHECK(cat.item_size(static_id("e2")) == 100);
  CHECK(cat.item_size(dynamic_id("e1", 3)) == 20);
  CHECK(cat.packet_size({static_id("e1"), static_id("e2")}) == 300);
  cat.set_coded_size({static_id("e1"), static_id("e2")}, 150);
  CHECK(cat.make_packet({static_id("e2"), static_id("e1")}).size() == 150);
  CHECK_FALSE(cat.dynamic_enabled("e2"));

  cat.add_dynamic_item("e1", 2);
  cat.add_dynamic_item("e1", 5);
  CHECK(cat.latest_dynamic("e1", 0, 4) == std::optional<Slot>(2));
  CHECK(cat.latest_dynamic("e1", 3, 9) == std::optional<Slot>(5));
  CHECK_FALSE(cat.latest_dynamic("e1", 3, 4));
}
