#include "physgen/pipeline/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "physgen/core/image.hpp"
#include "physgen/core/rng.hpp"

namespace physgen::pipeline {

namespace {

constexpr const char* kHeader = "sample_id,task,seed,input_path,target_path,params_json_path,split,status";

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// RFC 4180 records; quoted fields may hold commas, quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ValidationError("manifest: unterminated quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string Manifest::to_csv() const {
  std::ostringstream out;
  out << kHeader << '\n';
  for (const ManifestRow& r : rows) {
    out << quote(r.sample_id) << ',' << quote(r.task) << ',' << r.seed << ',' << quote(r.input_path) << ','
        << quote(r.target_path) << ',' << quote(r.params_json_path) << ',' << quote(r.split) << ','
        << quote(r.status) << '\n';
  }
  return out.str();
}

Manifest Manifest::from_csv(const std::string& text) {
  const auto records = parse_csv(text);
  if (records.empty()) throw ValidationError("manifest: empty file");
  std::string header;
  for (std::size_t i = 0; i < records[0].size(); ++i) header += (i ? "," : "") + records[0][i];
  if (header != kHeader) throw ValidationError("manifest: unexpected header '" + header + "'");
  Manifest m;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i];
    if (f.size() != 8) throw ValidationError("manifest: line " + std::to_string(i + 1) + " has " +
                                             std::to_string(f.size()) + " fields");
    ManifestRow r;
    r.sample_id = f[0];
    r.task = f[1];
    try {
      std::size_t used = 0;
      r.seed = std::stoull(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ValidationError("manifest: bad seed '" + f[2] + "' on line " + std::to_string(i + 1));
    }
    r.input_path = f[3];
    r.target_path = f[4];
    r.params_json_path = f[5];
    r.split = f[6];
    r.status = f[7];
    if (!seen.insert(r.sample_id).second) throw ValidationError("manifest: duplicate sample id " + r.sample_id);
    m.rows.push_back(std::move(r));
  }
  return m;
}

void Manifest::write(const std::filesystem::path& path) const { write_text_file(path, to_csv()); }

Manifest Manifest::read(const std::filesystem::path& path) { return from_csv(read_text_file(path)); }

namespace {

void check_ratios(const std::array<double, 3>& r) {
  for (double v : r)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("split ratios must be finite and non-negative");
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) throw ValidationError("split ratios must sum to 1");
}

// Rank -> split index for n items.
std::vector<int> split_by_rank(std::size_t n, const std::array<double, 3>& r) {
  const std::size_t n_train = static_cast<std::size_t>(std::llround(r[0] * n));
  const std::size_t n_eval = std::min(n - std::min(n, n_train), static_cast<std::size_t>(std::llround(r[1] * n)));
  std::vector<int> out(n, 2);
  for (std::size_t i = 0; i < n; ++i) out[i] = i < n_train ? 0 : (i < n_train + n_eval ? 1 : 2);
  return out;
}

std::vector<std::size_t> hash_order(const std::vector<std::string>& ids) {
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ha = fnv1a64(ids[a]), hb = fnv1a64(ids[b]);
    return ha != hb ? ha < hb : ids[a] < ids[b];
  });
  return order;
}

}  // namespace

Manifest split_manifest(Manifest manifest, std::array<double, 3> ratios) {
  check_ratios(ratios);
  std::vector<std::string> ids;
  for (const ManifestRow& r : manifest.rows) ids.push_back(r.sample_id);
  const auto order = hash_order(ids);
  const auto split = split_by_rank(ids.size(), ratios);
  for (std::size_t rank = 0; rank < order.size(); ++rank) manifest.rows[order[rank]].split = kSplitNames[split[rank]];
  return manifest;
}

std::string split_of(const std::string& id, const std::vector<std::string>& ids, std::array<double, 3> ratios) {
  check_ratios(ratios);
  const auto order = hash_order(ids);
  const auto split = split_by_rank(ids.size(), ratios);
  for (std::size_t rank = 0; rank < order.size(); ++rank)
    if (ids[order[rank]] == id) return kSplitNames[split[rank]];
  throw ValidationError("split_of: unknown id " + id);
}

}  // namespace physgen::pipeline
