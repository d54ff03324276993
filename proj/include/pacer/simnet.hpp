#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pacer/core_types.hpp"
#include "pacer/epoch_engine.hpp"
#include "pacer/schedule.hpp"
#include "pacer/tunnel.hpp"

namespace pacer {

enum class Mutant : std::uint8_t {
  none,
  secret_te,
  handler_delay_timestamp,
  pad_len_exposure,
  secret_sid,
  dummy_suppression,
};
const char* mutant_name(Mutant m);
Mutant parse_mutant(const std::string& s);
const std::vector<Mutant>& all_mutants();

struct InboundEvent {
  enum class Kind : std::uint8_t { request, ack, timeout };
  TimeNs at;
  FlowId flow;
  Kind kind = Kind::request;
  int sid = kDefaultSid;
  bool authenticated = true;
  std::uint64_t ack_seq = 0;
  std::uint32_t rwnd = 0;

  friend auto operator<=>(const InboundEvent&, const InboundEvent&) = default;
};

struct Scenario {
  struct Request {
    FlowId flow;
    TimeNs at;
    int sid = kDefaultSid;
    bool authenticated = true;
  };
  struct Congestion {
    TimeNs start;
    TimeNs duration;
  };

  PacerConfig cfg = PacerConfig::defaults(2);
  std::uint64_t seed = 1;         // public randomness
  std::uint64_t secret_seed = 1;  // the secret side of a single run
  std::uint32_t epochs = 200;
  std::vector<Request> requests;
  std::vector<std::pair<FlowId, std::uint64_t>> losses;  // (flow, seq) dropped once
  std::vector<Congestion> congestion;  // ACKs landing inside are held to the end
  std::uint32_t rwnd = 65535;
  TimeNs rtt{300};
  TimeNs rtt_jitter{40};
  TimeNs rto{4000};
  std::uint64_t initial_window = 10;
  TimeNs handler_delay_max{35};
  std::uint32_t max_response = 30000;
  Mutant mutant = Mutant::none;
};

// key=value lines; repeatable keys: request=flow,time[,sid[,unauth]],
// loss=flow,seq, congestion=start,duration. Config keys: epsilon, delta_xmit,
// delta_delay, batch_max, mtu, m_payload, n_flows.
Scenario parse_scenario(std::istream& is);

// Sets one config key; returns false if the key is not a config key.
bool set_config_key(PacerConfig& cfg, const std::string& key, const std::string& value);
// key=value lines of config keys only; delta is derived.
PacerConfig parse_config(std::istream& is);

struct ClientFlow {
  std::set<std::uint64_t> received;
  std::uint64_t next_expected = 1;
  std::uint64_t data_seen = 0;
  friend bool operator==(const ClientFlow&, const ClientFlow&) = default;
};

struct EnvPublic {
  std::vector<InboundEvent> pending;
  std::map<FlowId, ClientFlow> clients;
  std::set<std::pair<FlowId, std::uint64_t>> dropped;
  friend bool operator==(const EnvPublic&, const EnvPublic&) = default;
};

struct EnvState {
  EnvPublic pub;
  std::vector<std::uint8_t> priv;
};

struct PendingWrite {
  TimeNs at;
  FlowId flow;
  std::vector<std::uint8_t> bytes;
};

struct GuestPublic {
  std::uint64_t events_seen = 0;
  std::map<FlowId, FlowPublic> flows;
  friend bool operator==(const GuestPublic&, const GuestPublic&) = default;
};

struct GuestState {
  std::uint64_t events_seen = 0;
  std::mt19937_64 secret_rng;
  std::vector<PendingWrite> writes;
  std::vector<EventRecord> log;
};

struct Configuration {
  EnvState env;
  GuestState guest;
  EpochEngine hypace;  // profiles, update queue and packet subqueues
  std::vector<InboundEvent> q_guest;
  std::vector<Emitted> q_env;
  std::size_t env_consumed = 0;

  TimeNs tg() const { return hypace.now; }
};

GuestPublic guest_public(const Configuration& c);

class EnvModel {
 public:
  virtual ~EnvModel() = default;
  virtual void step(Configuration& c, TimeNs epoch_end) const = 0;
};

class GuestModel {
 public:
  virtual ~GuestModel() = default;
  virtual void step(Configuration& c, TimeNs epoch_end) const = 0;
};

class ReferenceEnv final : public EnvModel {
 public:
  explicit ReferenceEnv(Scenario s) : s_(std::move(s)) {}
  void step(Configuration& c, TimeNs epoch_end) const override;

 private:
  Scenario s_;
};

// Answers each request after a secret processing delay no larger than
// delta_delay, with a response of secret length and content.
class ReferenceGuest final : public GuestModel {
 public:
  explicit ReferenceGuest(Scenario s) : s_(std::move(s)) {}
  void step(Configuration& c, TimeNs epoch_end) const override;

 private:
  Scenario s_;
};

Configuration make_configuration(const Scenario& s, std::uint64_t secret_seed);

// One E;G;H step. Throws ConformanceViolation when I1 or I2 breaks.
void step(Configuration& c, const EnvModel& env, const GuestModel& guest);

ObservationTrace run(Configuration& c, std::uint32_t n, const EnvModel& env,
                     const GuestModel& guest);

// Queueing delays seen by a probe sharing a FIFO bottleneck with the trace.
// Probes of probe_size bytes leave every probe_interval until horizon;
// bottleneck_rate is bytes per time unit. Ties go to the victim.
std::vector<TimeNs> contention_observe(const ObservationTrace& trace, TimeNs probe_interval,
                                       std::uint32_t bottleneck_rate, TimeNs horizon,
                                       std::uint32_t probe_size = 0);

}  // namespace pacer
