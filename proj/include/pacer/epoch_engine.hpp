#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "pacer/core_types.hpp"
#include "pacer/schedule.hpp"
#include "pacer/tunnel.hpp"

namespace pacer {

// Time the transmit handler spends before it reaches the batch. May depend on
// secrets; must never show up in what is emitted.
using HandlerDelayModel =
    std::function<TimeNs(std::uint64_t seed, std::uint64_t epoch, std::uint64_t secret_tag)>;

HandlerDelayModel no_handler_delay();
// Deterministic hash of (seed, epoch, secret_tag) into [0, max_delay].
HandlerDelayModel hashed_handler_delay(TimeNs max_delay);

// Planted leaks, used to check that the noninterference harness catches them.
struct EngineFaults {
  bool delay_in_timestamp = false;
  bool expose_pad_len = false;
  bool suppress_dummies = false;
};

struct CausalPair {
  CausalKind kind;
  FlowId flow;
  TimeNs e1;
  TimeNs e2;
};

struct SlotMark {
  TimeNs effective_at;
  Cause cause;
};

struct EpochEngine {
  PacerConfig cfg;
  ScheduleDb db;
  std::map<FlowId, FlowState> flows;
  UpdateQueue updates;
  TimeNs now;
  HandlerDelayModel handler_delay = no_handler_delay();
  std::uint64_t seed = 0;
  std::uint64_t secret_tag = 0;
  EngineFaults faults;

  std::vector<CausalPair> causal;
  std::map<FlowId, std::vector<SlotMark>> marks;
  std::map<FlowId, std::vector<Cause>> armed;

  std::uint64_t epoch_index() const { return static_cast<std::uint64_t>(now.count() / cfg.epsilon.count()); }
};

EpochEngine make_engine(const PacerConfig& cfg, ScheduleDb db);

// Applies due updates, then emits every slot in (now, now + epsilon] at
// now + epsilon, and advances now by one epoch.
std::vector<Emitted> run_epoch(EpochEngine& e);

std::optional<std::pair<FlowId, TimeNs>> peek_next_slot(const EpochEngine& e);

}  // namespace pacer
