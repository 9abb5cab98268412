#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace cachekv::bench {

struct ReportRow {
  std::string experiment;
  std::string config;
  std::string param;
  std::string metric;
  double value = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// Flat metric table; serializes to `experiment,config,param,metric,value,seed`.
class ExperimentReport {
 public:
  void add(std::string experiment, std::string config, std::string param, std::string metric,
           double value, std::uint64_t seed);
  void append(const ExperimentReport& other);

  const std::vector<ReportRow>& rows() const noexcept { return rows_; }

  /// First row matching (param, metric), optionally filtered by config.
  std::optional<double> value(std::string_view param, std::string_view metric,
                              std::string_view config = {}) const;

  void write_csv(std::ostream& os, bool header = true) const;
  std::string to_csv() const;

  static constexpr std::string_view kHeader = "experiment,config,param,metric,value,seed";

 private:
  std::vector<ReportRow> rows_;
};

/// Shortest round-trip decimal form of `v`.
std::string format_value(double v);

}  // namespace cachekv::bench
