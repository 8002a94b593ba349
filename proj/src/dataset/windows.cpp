#include "opscore/dataset/windows.hpp"

#include "opscore/common/error.hpp"

namespace opscore::dataset {

using reward::kWindowLength;

std::vector<reward::WindowPair> extract_windows(const SessionLog& log) {
  const int m = static_cast<int>(log.steps.size());
  if (m <= kWindowLength)
    fail(ErrorCode::SessionTooShort, "session '" + log.session_id + "' has " + std::to_string(m) +
                                         " steps; windows need more than " + std::to_string(kWindowLength));
  const MatX rows = log.dynamic_rows();
  std::vector<reward::WindowPair> pairs(static_cast<std::size_t>(m - kWindowLength));
  for (int t = 0; t < m - kWindowLength; ++t) {
    pairs[t].input = rows.middleRows(t, kWindowLength);
    pairs[t].target = rows.middleRows(t + 1, kWindowLength);
  }
  return pairs;
}

std::vector<reward::WindowPair> extract_windows(const SessionLog& log, const reward::FeatureStats& stats) {
  auto pairs = extract_windows(log);
  for (auto& p : pairs) {
    p.input = stats.normalize(p.input);
    p.target = stats.normalize(p.target);
  }
  return pairs;
}

std::vector<reward::WindowRows> input_windows(const SessionLog& log) {
  std::vector<reward::WindowRows> out;
  for (auto& p : extract_windows(log)) out.push_back(p.input);
  return out;
}

reward::FeatureStats telemetry_stats(const std::vector<const SessionLog*>& sessions) {
  Eigen::Index n = 0;
  for (const auto* s : sessions) n += static_cast<Eigen::Index>(s->steps.size());
  require(n > 0, ErrorCode::InvalidArgument, "no telemetry rows");
  MatX rows(n, kNumDynamicFeatures);
  Eigen::Index r = 0;
  for (const auto* s : sessions) {
    const MatX part = s->dynamic_rows();
    rows.middleRows(r, part.rows()) = part;
    r += part.rows();
  }
  return reward::FeatureStats::from_rows(rows);
}

MatX infraction_columns(const std::vector<const SessionLog*>& sessions) {
  Eigen::Index n = 0;
  for (const auto* s : sessions) n += static_cast<Eigen::Index>(s->steps.size());
  MatX out(kNumInfractionTypes, n);
  Eigen::Index c = 0;
  for (const auto* s : sessions)
    for (const auto& step : s->steps) out.col(c++) = step.infractions.cast<double>();
  return out;
}

}  // namespace opscore::dataset
