#pragma once

#include <vector>

#include "opscore/dataset/session.hpp"
#include "opscore/reward/dynamic_model.hpp"

namespace opscore::dataset {

// The m - 32 aligned (input rows t..t+31, target rows t+1..t+32) pairs of a
// session's raw telemetry. SessionTooShort unless m > 32.
std::vector<reward::WindowPair> extract_windows(const SessionLog& log);

// Same pairs, z-scored with `stats`.
std::vector<reward::WindowPair> extract_windows(const SessionLog& log, const reward::FeatureStats& stats);

// Input windows only (raw), one per pair; what per-window scoring consumes.
std::vector<reward::WindowRows> input_windows(const SessionLog& log);

// Telemetry statistics over every step of the given sessions.
reward::FeatureStats telemetry_stats(const std::vector<const SessionLog*>& sessions);

// 5 x n matrix of per-step infraction counts over the given sessions.
MatX infraction_columns(const std::vector<const SessionLog*>& sessions);

}  // namespace opscore::dataset
