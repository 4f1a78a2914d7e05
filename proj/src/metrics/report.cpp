#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "physgen/metrics/metrics.hpp"

namespace physgen::metrics {

void EvalReport::aggregate() {
  std::set<std::string> keys;
  for (const SampleMetrics& s : samples)
    for (const auto& [k, v] : s.values) keys.insert(k);
  mean.clear();
  non_evaluable_rate.clear();
  for (const std::string& k : keys) {
    double sum = 0.0;
    std::size_t have = 0, applicable = 0;
    for (const SampleMetrics& s : samples) {
      auto it = s.values.find(k);
      if (it == s.values.end()) continue;  // metric does not apply
      ++applicable;
      if (!it->second) continue;
      sum += *it->second;
      ++have;
    }
    if (have) mean[k] = sum / have;
    non_evaluable_rate[k] = 1.0 - static_cast<double>(have) / applicable;
  }
  const std::size_t total = std::max(expected, samples.size());
  coverage = total == 0 ? 0.0 : static_cast<double>(samples.size()) / total;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["task"] = task;
  j["expected"] = expected;
  j["evaluated"] = samples.size();
  j["coverage"] = coverage;
  j["missing"] = missing;
  j["mean"] = mean;
  j["non_evaluable_rate"] = non_evaluable_rate;
  j["runtime_ms_per_sample"] = runtime_ms_per_sample ? nlohmann::ordered_json(*runtime_ms_per_sample) : nullptr;
  auto& rows = j["samples"] = nlohmann::ordered_json::array();
  for (const SampleMetrics& s : samples) {
    nlohmann::ordered_json r;
    r["sample_id"] = s.sample_id;
    for (const auto& [k, v] : s.values) r[k] = v ? nlohmann::ordered_json(*v) : nullptr;
    rows.push_back(r);
  }
  return j.dump(2);
}

std::string EvalReport::to_csv() const {
  std::set<std::string> keys;
  for (const SampleMetrics& s : samples)
    for (const auto& [k, v] : s.values) keys.insert(k);
  std::ostringstream out;
  out << "sample_id";
  for (const std::string& k : keys) out << ',' << k;
  out << '\n';
  char buf[64];
  for (const SampleMetrics& s : samples) {
    out << s.sample_id;
    for (const std::string& k : keys) {
      out << ',';
      auto it = s.values.find(k);
      if (it != s.values.end() && it->second) {
        std::snprintf(buf, sizeof buf, "%.17g", *it->second);
        out << buf;
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string EvalReport::format_table() const {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "task %s: %zu/%zu samples (coverage %.3f)\n", task.c_str(), samples.size(),
                std::max(expected, samples.size()), coverage);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-16s %14s %14s\n", "metric", "mean", "non-evaluable");
  out << buf;
  for (const auto& [k, rate] : non_evaluable_rate) {
    auto it = mean.find(k);
    if (it != mean.end())
      std::snprintf(buf, sizeof buf, "%-16s %14.6f %14.3f\n", k.c_str(), it->second, rate);
    else
      std::snprintf(buf, sizeof buf, "%-16s %14s %14.3f\n", k.c_str(), "-", rate);
    out << buf;
  }
  if (runtime_ms_per_sample) {
    std::snprintf(buf, sizeof buf, "runtime/sample   %14.3f ms\n", *runtime_ms_per_sample);
    out << buf;
  }
  for (const std::string& id : missing) out << "missing " << id << '\n';
  return out.str();
}

}  // namespace physgen::metrics
