#include "cachekv/bench/report.hpp"

#include <charconv>
#include <sstream>

#include "cachekv/types.hpp"

namespace cachekv::bench {

namespace {
void check_field(const std::string& s) {
  if (s.find_first_of(",\n\r\"") != std::string::npos) {
    throw usage_error("report fields must not contain commas, quotes or newlines: " + s);
  }
}
}  // namespace

void ExperimentReport::add(std::string experiment, std::string config, std::string param,
                           std::string metric, double value, std::uint64_t seed) {
  check_field(experiment);
  check_field(config);
  check_field(param);
  check_field(metric);
  rows_.push_back({std::move(experiment), std::move(config), std::move(param), std::move(metric),
                   value, seed});
}

void ExperimentReport::append(const ExperimentReport& other) {
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

std::optional<double> ExperimentReport::value(std::string_view param, std::string_view metric,
                                              std::string_view config) const {
  for (const auto& r : rows_) {
    if (r.param == param && r.metric == metric && (config.empty() || r.config == config)) {
      return r.value;
    }
  }
  return std::nullopt;
}

std::string format_value(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return {buf, end};
}

void ExperimentReport::write_csv(std::ostream& os, bool header) const {
  if (header) os << kHeader << '\n';
  for (const auto& r : rows_) {
    os << r.experiment << ',' << r.config << ',' << r.param << ',' << r.metric << ','
       << format_value(r.value) << ',' << r.seed << '\n';
  }
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

}  // namespace cachekv::bench
