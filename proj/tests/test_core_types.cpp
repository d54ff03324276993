#include <doctest.h>

#include <sstream>

#include "pacer/core_types.hpp"

using namespace pacer;

TEST_CASE("TimeNs arithmetic is checked") {
  CHECK((TimeNs(5) + TimeNs(7)).count() == 12);
  CHECK_THROWS_AS(TimeNs(-1), TimeError);
  CHECK_THROWS_AS(TimeNs(3) - TimeNs(4), TimeError);
  CHECK_THROWS_AS(TimeNs::max() + TimeNs(1), TimeError);
  CHECK_THROWS_AS(TimeNs::max() * 2, TimeError);
  CHECK(round_up(TimeNs(121), TimeNs(120)).count() == 240);
  CHECK(round_up(TimeNs(240), TimeNs(120)).count() == 240);
  CHECK(round_up(TimeNs(0), TimeNs(120)).count() == 0);
}

TEST_CASE("default config carries the microbenchmark constants") {
  const auto c = PacerConfig::defaults();
  CHECK(c.epsilon.count() == 120);
  CHECK(c.delta_xmit.count() == 35);
  CHECK(c.delta_delay.count() == 20000);
  CHECK(c.delta == c.epsilon + c.delta_delay);
  CHECK(c.batch_max == 38);
  CHECK(c.mtu == 1500);
  CHECK(c.m_payload == 1448);

  auto bad = c;
  bad.delta = TimeNs(1);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.m_payload = 1500;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(PacerConfig::make(TimeNs(120), TimeNs(35), TimeNs(0), 0, 1500, 1448, 1), ConfigError);
}

TEST_CASE("FlowId range") {
  const auto c = PacerConfig::defaults(3);
  CHECK(FlowId::checked(3, c).index() == 3);
  CHECK_THROWS_AS(FlowId::checked(0, c), ConfigError);
  CHECK_THROWS_AS(FlowId::checked(4, c), ConfigError);
}

TEST_CASE("packet constructors keep size invariants") {
  const auto c = PacerConfig::defaults();
  const auto d = Packet::dummy(FlowId(1), 1, TimeNs(0), c);
  CHECK(d.wire_size == c.mtu);
  CHECK(d.pad_len == c.m_payload);
  CHECK_NOTHROW(d.check(c));
  const auto p = Packet::data(FlowId(1), 2, std::vector<std::uint8_t>(100, 7), TimeNs(0), c);
  CHECK(p.kind == PacketKind::payload);
  CHECK(p.pad_len == 1348);
  const auto a = Packet::ack(FlowId(1), 0, TimeNs(0));
  CHECK(a.wire_size < c.mtu);
  CHECK_NOTHROW(a.check(c));
  CHECK_THROWS_AS(Packet::data(FlowId(1), 3, std::vector<std::uint8_t>(1449), TimeNs(0), c), ConfigError);
}

TEST_CASE("trace_project") {
  const auto c = PacerConfig::defaults(2);
  CHECK(trace_project({}).events.empty());
  std::vector<Emitted> q{{TimeNs(100), Packet::dummy(FlowId(1), 1, TimeNs(0), c)},
                         {TimeNs(100), Packet::data(FlowId(2), 1, {1, 2, 3}, TimeNs(0), c)}};
  const auto t = trace_project(q);
  REQUIRE(t.events.size() == 2);
  CHECK(t.events[0] == ObsEvent{TimeNs(100), FlowId(1), 1500});
  CHECK(t.events[1] == ObsEvent{TimeNs(100), FlowId(2), 1500});
}

TEST_CASE("queues that differ only in payload bytes project identically") {
  // Every pair of 2-packet queues over a small alphabet of payloads.
  const auto c = PacerConfig::defaults(2);
  const std::vector<std::vector<std::uint8_t>> bodies{{}, {0}, {1}, {0, 0, 0}, std::vector<std::uint8_t>(1448, 9)};
  for (const auto& a0 : bodies)
    for (const auto& a1 : bodies)
      for (const auto& b0 : bodies)
        for (const auto& b1 : bodies) {
          std::vector<Emitted> qa{{TimeNs(240), Packet::data(FlowId(1), 1, a0, TimeNs(0), c)},
                                  {TimeNs(360), Packet::data(FlowId(2), 1, a1, TimeNs(0), c)}};
          std::vector<Emitted> qb{{TimeNs(240), Packet::data(FlowId(1), 1, b0, TimeNs(0), c)},
                                  {TimeNs(360), Packet::data(FlowId(2), 1, b1, TimeNs(0), c)}};
          CHECK(trace_equal(trace_project(qa), trace_project(qb)));
        }
}

TEST_CASE("trace_equal") {
  ObservationTrace empty;
  CHECK(trace_equal(empty, empty));
  ObservationTrace a{{{TimeNs(120), FlowId(1), 1500}, {TimeNs(120), FlowId(2), 1500}}};
  ObservationTrace b{{{TimeNs(120), FlowId(2), 1500}, {TimeNs(120), FlowId(1), 1500}}};
  CHECK(trace_equal(a, b));
  ObservationTrace c{{{TimeNs(121), FlowId(1), 1500}, {TimeNs(120), FlowId(2), 1500}}};
  CHECK_FALSE(trace_equal(a, c));
  ObservationTrace d{{{TimeNs(120), FlowId(1), 1500}}};
  CHECK_FALSE(trace_equal(a, d));
}

TEST_CASE("trace csv round trip") {
  ObservationTrace a{{{TimeNs(120), FlowId(1), 1500}, {TimeNs(240), FlowId(2), 64}}};
  std::stringstream ss;
  write_trace_csv(ss, a);
  CHECK(ss.str() == "120,1,1500\n240,2,64\n");
  CHECK(read_trace_csv(ss) == a);
  std::stringstream bad("120;1;1500\n");
  CHECK_THROWS_AS(read_trace_csv(bad), ParseError);
}
