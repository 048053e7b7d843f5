// Batch pipeline driver: ingest -> calibrate -> simulate -> verify.
// Every command writes its outputs plus a manifest.txt into --output; output
// files carry a reference to that manifest. Exit codes: 0 success, 2 input
// error, 3 estimation/validation error, 4 verification failure.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "tickms/calibrate.hpp"
#include "tickms/core.hpp"
#include "tickms/dcmm.hpp"
#include "tickms/ingest.hpp"
#include "tickms/markov.hpp"
#include "tickms/ms_model.hpp"
#include "tickms/rng.hpp"
#include "tickms/simulate.hpp"
#include "tickms/stats.hpp"

namespace fs = std::filesystem;
using namespace tickms;

namespace {

constexpr const char* kVersion = "tickms 0.1.0";
constexpr const char* kManifestName = "manifest.txt";

constexpr int kExitInput = 2;
constexpr int kExitEstimation = 3;
constexpr int kExitVerification = 4;

struct CliError {
  int code;
  std::string message;
};

// ---------------------------------------------------------------- digests

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{kExitInput, "cannot read file: " + path.string()};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

std::string digest_string(std::string_view data) { return "fnv1a:" + hex64(fnv1a64(data)); }

std::string digest_file(const fs::path& path) { return digest_string(read_file(path)); }

std::string iso_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// ---------------------------------------------------------------- manifest

// Ordered key=value collector shared by the manifest and the report files.
class KeyValueReport {
 public:
  void add(std::string key, std::string value) {
    lines_.emplace_back(std::move(key), std::move(value));
  }
  void add(std::string key, double value) { add(std::move(key), format_double(value)); }
  void add(std::string key, long value) { add(std::move(key), std::to_string(value)); }
  void add_comment(std::string text) { lines_.emplace_back("#", std::move(text)); }

  [[nodiscard]] std::string render() const {
    std::ostringstream out;
    for (const auto& [key, value] : lines_) {
      if (key == "#") {
        out << "# " << value << "\n";
      } else {
        out << key << " = " << value << "\n";
      }
    }
    return std::move(out).str();
  }

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError{kExitInput, "cannot write file: " + path.string()};
  out << content;
  if (!out) throw CliError{kExitInput, "write failed: " + path.string()};
}

// Collects command outputs, then writes the manifest naming all of them.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw CliError{kExitInput, "cannot create output directory: " + dir_.string()};
  }

  [[nodiscard]] const fs::path& dir() const { return dir_; }

  void write(const std::string& name, const std::string& content) {
    write_text_file(dir_ / name, content);
    digests_.emplace_back(name, digest_string(content));
  }

  void finish(const std::string& command, const KeyValueReport& details) {
    KeyValueReport manifest;
    manifest.add("command", command);
    manifest.add("version", std::string(kVersion));
    manifest.add("created_utc", iso_utc_now());
    std::string body = details.render();
    for (const auto& [name, digest] : digests_) {
      body += "output[" + name + "] = " + digest + "\n";
    }
    write_text_file(dir_ / kManifestName,
                    manifest.render() + body);
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> digests_;
};

// ---------------------------------------------------------------- config

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Flat key = value file with optional [section] headers; a section prefixes
// its keys as "section.key". '#' starts a comment line.
class ConfigFile {
 public:
  ConfigFile() = default;

  static ConfigFile load(const fs::path& path) {
    ConfigFile config;
    config.source_ = read_file(path);
    std::istringstream in(config.source_);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string body = trim(line);
      if (body.empty() || body[0] == '#') continue;
      if (body.front() == '[' && body.back() == ']') {
        section = trim(body.substr(1, body.size() - 2));
        if (!section.empty()) section += '.';
        continue;
      }
      const std::size_t eq = body.find('=');
      if (eq == std::string::npos) {
        throw CliError{kExitInput, path.string() + ":" + std::to_string(line_no) +
                                       ": expected key = value"};
      }
      const std::string key = section + trim(body.substr(0, eq));
      if (key.empty() || key == section) {
        throw CliError{kExitInput, path.string() + ":" + std::to_string(line_no) +
                                       ": empty key"};
      }
      config.values_[key] = trim(body.substr(eq + 1));
    }
    return config;
  }

  [[nodiscard]] std::optional<std::string> get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    consumed_.insert(key);
    return it->second;
  }

  [[nodiscard]] std::optional<double> get_double(const std::string& key) const {
    const auto raw = get(key);
    if (!raw) return std::nullopt;
    try {
      std::size_t pos = 0;
      const double v = std::stod(*raw, &pos);
      if (pos != raw->size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw CliError{kExitInput, "config key '" + key + "': not a number: " + *raw};
    }
  }

  [[nodiscard]] std::optional<long> get_long(const std::string& key) const {
    const auto raw = get(key);
    if (!raw) return std::nullopt;
    try {
      std::size_t pos = 0;
      const long v = std::stol(*raw, &pos);
      if (pos != raw->size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw CliError{kExitInput, "config key '" + key + "': not an integer: " + *raw};
    }
  }

  [[nodiscard]] double require_double(const std::string& key) const {
    const auto v = get_double(key);
    if (!v) throw CliError{kExitInput, "config key '" + key + "' is required"};
    return *v;
  }

  void reject_unconsumed() const {
    for (const auto& [key, value] : values_) {
      if (!consumed_.contains(key)) {
        throw CliError{kExitInput, "config key '" + key + "' is not recognized"};
      }
    }
  }

  [[nodiscard]] const std::string& source() const { return source_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
  std::string source_;
};

// ---------------------------------------------------------------- options

// Per-command options after merging flags, config file, and environment.
// Flags win over file keys; TICKMS_SEED fills the seed when neither is set.
struct CommonOptions {
  std::string input;
  std::string output;
  std::string model;
  int p = 0;
  long length = 1'000'000;
  long runs = 25;
  std::uint64_t seed = 0;
  double tick_size = 0.01;
  long max_lag = 50;
  std::pair<long, long> window{6, 50};
  bool overlap = true;

  bool model_set = false;
  bool p_set = false;
  bool length_set = false;
  bool runs_set = false;
  bool seed_set = false;
  bool max_lag_set = false;
  bool window_set = false;
  bool overlap_set = false;
  std::string window_raw;
  std::string overlap_raw;
};

std::pair<long, long> parse_window(const std::string& raw) {
  const std::size_t colon = raw.find(':');
  if (colon == std::string::npos) {
    throw CliError{kExitInput, "--window expects lo:hi, got " + raw};
  }
  try {
    std::size_t pos = 0;
    const long lo = std::stol(raw.substr(0, colon), &pos);
    if (pos != colon) throw std::invalid_argument("lo");
    const std::string hi_text = raw.substr(colon + 1);
    const long hi = std::stol(hi_text, &pos);
    if (pos != hi_text.size()) throw std::invalid_argument("hi");
    if (lo >= hi) throw CliError{kExitInput, "--window needs lo < hi, got " + raw};
    return {lo, hi};
  } catch (const CliError&) {
    throw;
  } catch (const std::exception&) {
    throw CliError{kExitInput, "--window expects integers lo:hi, got " + raw};
  }
}

// Applies "flags win over file, TICKMS_SEED as seed fallback" to the options.
void merge_config(CommonOptions& opt, const ConfigFile& config) {
  if (!opt.model_set) {
    if (const auto v = config.get("model")) {
      opt.model = *v;
      opt.model_set = true;
    }
  } else {
    static_cast<void>(config.get("model"));
  }
  if (const auto v = config.get_long("p"); v && !opt.p_set) {
    opt.p = static_cast<int>(*v);
    opt.p_set = true;
  }
  if (const auto v = config.get_long("length"); v && !opt.length_set) {
    opt.length = *v;
    opt.length_set = true;
  }
  if (const auto v = config.get_long("runs"); v && !opt.runs_set) {
    opt.runs = *v;
    opt.runs_set = true;
  }
  if (const auto v = config.get_long("seed"); v && !opt.seed_set) {
    opt.seed = static_cast<std::uint64_t>(*v);
    opt.seed_set = true;
  }
  if (const auto v = config.get_long("max_lag"); v && !opt.max_lag_set) {
    opt.max_lag = *v;
    opt.max_lag_set = true;
  }
  if (const auto v = config.get("window"); v && !opt.window_set) {
    opt.window = parse_window(*v);
    opt.window_set = true;
  }
  if (const auto v = config.get("overlap")) {
    if (*v != "on" && *v != "off") {
      throw CliError{kExitInput, "config key 'overlap' must be on or off"};
    }
    if (!opt.overlap_set) {
      opt.overlap = *v == "on";
      opt.overlap_set = true;
    }
  }
}

void apply_seed_fallback(CommonOptions& opt) {
  if (opt.seed_set) return;
  const char* env = std::getenv("TICKMS_SEED");
  if (env == nullptr) return;
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(env, &pos);
    if (pos != std::string(env).size()) throw std::invalid_argument("trailing");
    opt.seed = v;
    opt.seed_set = true;
  } catch (const std::exception&) {
    throw CliError{kExitInput, std::string("TICKMS_SEED is not an integer: ") + env};
  }
}

// ---------------------------------------------------------------- params

struct LoadedModel {
  Model model = Model::Ms;
  std::variant<MsParams, DcmmParams> params;
  int p = 0;
};

Model model_from_name(const std::string& name) {
  if (name == "msb") return Model::MsBernoulli;
  if (name == "ms") return Model::Ms;
  if (name == "dcmm") return Model::Dcmm;
  throw CliError{kExitInput, "unknown model '" + name + "' (expected msb, ms, dcmm)"};
}

std::string model_name(Model model) {
  switch (model) {
    case Model::MsBernoulli: return "msb";
    case Model::Ms: return "ms";
    case Model::Dcmm: return "dcmm";
  }
  return "?";
}

// Model parameters from the config file; the model name and order may come
// from flags. Unknown keys are rejected so typos cannot silently default.
LoadedModel load_model(const ConfigFile& config, const CommonOptions& opt) {
  if (!opt.model_set) {
    throw CliError{kExitInput, "model is required (--model or config key 'model')"};
  }
  LoadedModel loaded;
  loaded.model = model_from_name(opt.model);
  if (loaded.model == Model::Dcmm) {
    DcmmParams params;
    params.chain = SpreadChainParams::markov(config.require_double("p11"),
                                             config.require_double("p21"));
    const int p = opt.p_set ? opt.p : static_cast<int>(config.get_long("p").value_or(0));
    if (p < 1) throw CliError{kExitInput, "dcmm requires an order p >= 1"};
    params.p = p;
    params.alpha1 = config.require_double("alpha1");
    for (int i = 1; i <= p; ++i) {
      char key[16];
      std::snprintf(key, sizeof key, "beta_%d", i);
      params.beta1.push_back(config.require_double(key));
    }
    params.theta4 = config.require_double("theta4");
    loaded.p = p;
    loaded.params = std::move(params);
  } else {
    MsParams params;
    if (loaded.model == Model::MsBernoulli) {
      params.chain = SpreadChainParams::bernoulli(config.require_double("bernoulli_p"));
    } else {
      params.chain = SpreadChainParams::markov(config.require_double("p11"),
                                               config.require_double("p21"));
    }
    params.theta1 = config.require_double("theta1");
    params.theta4 = config.require_double("theta4");
    loaded.params = params;
  }
  return loaded;
}

std::string canonical_config(const CommonOptions& opt, const LoadedModel& loaded) {
  std::ostringstream out;
  out << "model=" << model_name(loaded.model) << ";length=" << opt.length
      << ";runs=" << opt.runs << ";seed=" << opt.seed
      << ";overlap=" << (opt.overlap ? "on" : "off");
  if (std::holds_alternative<MsParams>(loaded.params)) {
    const auto& p = std::get<MsParams>(loaded.params);
    if (p.chain.bernoulli_p) {
      out << ";bernoulli_p=" << format_double(*p.chain.bernoulli_p);
    } else {
      out << ";p11=" << format_double(p.chain.p11) << ";p21=" << format_double(p.chain.p21);
    }
    out << ";theta1=" << format_double(p.theta1) << ";theta4=" << format_double(p.theta4);
  } else {
    const auto& p = std::get<DcmmParams>(loaded.params);
    out << ";p11=" << format_double(p.chain.p11) << ";p21=" << format_double(p.chain.p21)
        << ";p=" << p.p << ";alpha1=" << format_double(p.alpha1);
    for (std::size_t i = 0; i < p.beta1.size(); ++i) {
      out << ";beta_" << i + 1 << "=" << format_double(p.beta1[i]);
    }
    out << ";theta4=" << format_double(p.theta4);
  }
  return std::move(out).str();
}

// ---------------------------------------------------------------- series io

constexpr const char* kSeriesHeader = "date,timestamp_ms,s,x,r,regime,segment";

std::string regime_name(RegimeLabel label) {
  switch (label) {
    case RegimeLabel::high: return "high";
    case RegimeLabel::low: return "low";
    case RegimeLabel::full: return "full";
  }
  return "?";
}

// One row per return; the row carries the arrival record of the pair, so the
// opening record of each segment has no row of its own. The segment column
// makes breaks explicit: a boundary can look continuous in (date, ts, s) yet
// still separate pairs that must not be counted together.
std::string render_series_csv(const TickSeries& series) {
  std::ostringstream out;
  out << "# manifest = " << kManifestName << "\n" << kSeriesHeader << "\n";
  const std::string regime = regime_name(series.regime_label);
  std::size_t segment_id = 0;
  for (const auto& segment : series.segments) {
    for (std::size_t t = 0; t < segment.returns.size(); ++t) {
      const TransitionState x =
          encode_transition(segment.spreads[t], segment.spreads[t + 1]);
      out << segment.dates[t + 1] << ',' << segment.timestamps_ms[t + 1] << ','
          << segment.spreads[t + 1].ticks() << ',' << x.value() << ','
          << segment.returns[t].half_ticks() << ',' << regime << ',' << segment_id
          << "\n";
    }
    ++segment_id;
  }
  return std::move(out).str();
}

int spread_before(int x) { return x <= 2 ? 1 : 2; }
int spread_after(int x) { return (x == 1 || x == 3) ? 1 : 2; }

constexpr const char* kPathHeader = "t,s,x,r";

// Simulated paths are a single unbroken segment; every row must chain to the
// previous one through its transition state.
TickSeries read_path_csv(std::istream& in, const fs::path& path, int line_no) {
  TickSegment segment;
  std::string line;
  const auto bad_row = [&](const std::string& why) -> CliError {
    return CliError{kExitInput, path.string() + ":" + std::to_string(line_no) + ": " + why};
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    long t = 0;
    int s = 0, x = 0, r = 0;
    if (std::sscanf(line.c_str(), "%ld,%d,%d,%d", &t, &s, &x, &r) != 4) {
      throw bad_row("expected t,s,x,r");
    }
    if (x < 1 || x > 4) throw bad_row("transition state out of 1..4");
    if (s != spread_after(x)) throw bad_row("spread does not match the transition state");
    const int prev = spread_before(x);
    try {
      if (segment.spreads.empty()) {
        segment.spreads.push_back(SpreadState(prev));
        segment.dates.push_back(0);
        segment.timestamps_ms.push_back(t);
      } else if (segment.spreads.back().ticks() != prev) {
        throw bad_row("spread does not chain to the previous row");
      }
      segment.spreads.push_back(SpreadState(s));
      segment.dates.push_back(0);
      segment.timestamps_ms.push_back(t + 1);
      segment.returns.push_back(Return(r));
    } catch (const std::invalid_argument& e) {
      throw bad_row(e.what());
    }
  }
  TickSeries series;
  if (!segment.spreads.empty()) series.segments.push_back(std::move(segment));
  try {
    series.validate();
  } catch (const std::exception& e) {
    throw CliError{kExitInput, path.string() + ": " + e.what()};
  }
  return series;
}

// Rebuilds a TickSeries from a series CSV. The segment column is the
// authoritative break signal; within a segment the transition column encodes
// the previous spread, so continuity is checked row by row and any mismatch
// marks the file corrupt rather than being silently restitched.
TickSeries read_series_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{kExitInput, "cannot read series file: " + path.string()};
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] == '#') continue;
    if (line == kPathHeader) return read_path_csv(in, path, line_no);
    if (line != kSeriesHeader) {
      throw CliError{kExitInput, path.string() + ": expected header '" +
                                     std::string(kSeriesHeader) + "' or '" +
                                     std::string(kPathHeader) + "'"};
    }
    header_seen = true;
    break;
  }
  if (!header_seen) {
    throw CliError{kExitInput, path.string() + ": missing header"};
  }

  TickSeries series;
  TickSegment current;
  bool regime_high = false, regime_low = false, regime_full = false;
  const auto close_segment = [&]() {
    if (!current.spreads.empty()) {
      series.segments.push_back(std::move(current));
      current = TickSegment{};
    }
  };
  const auto bad_row = [&](const std::string& why) -> CliError {
    return CliError{kExitInput, path.string() + ":" + std::to_string(line_no) + ": " + why};
  };

  long last_segment_id = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    int date = 0, s = 0, x = 0, r = 0;
    long ts = 0, segment_id = 0;
    char regime[8] = {0};
    const int fields = std::sscanf(line.c_str(), "%d,%ld,%d,%d,%d,%7[a-z],%ld",
                                   &date, &ts, &s, &x, &r, regime, &segment_id);
    if (fields != 7) throw bad_row("expected date,timestamp_ms,s,x,r,regime,segment");
    if (x < 1 || x > 4) throw bad_row("transition state out of 1..4");
    if (s != spread_after(x)) throw bad_row("spread does not match the transition state");
    const std::string regime_text(regime);
    if (regime_text == "high") {
      regime_high = true;
    } else if (regime_text == "low") {
      regime_low = true;
    } else if (regime_text == "full") {
      regime_full = true;
    } else {
      throw bad_row("regime must be high, low, or full");
    }

    const int prev = spread_before(x);
    const bool fresh = current.spreads.empty() || segment_id != last_segment_id;
    if (!fresh) {
      if (current.dates.back() != date) throw bad_row("date change inside a segment");
      if (current.timestamps_ms.back() > ts) throw bad_row("time runs backwards");
      if (current.spreads.back().ticks() != prev) {
        throw bad_row("spread does not chain to the previous row");
      }
    }
    try {
      if (fresh) {
        close_segment();
        // the opening record's own timestamp is not serialized; reuse the row's
        current.spreads.push_back(SpreadState(prev));
        current.dates.push_back(date);
        current.timestamps_ms.push_back(ts);
        last_segment_id = segment_id;
      }
      current.spreads.push_back(SpreadState(s));
      current.dates.push_back(date);
      current.timestamps_ms.push_back(ts);
      current.returns.push_back(Return(r));
    } catch (const std::invalid_argument& e) {
      throw bad_row(e.what());
    }
  }
  close_segment();

  if (regime_high && !regime_low && !regime_full) series.regime_label = RegimeLabel::high;
  if (regime_low && !regime_high && !regime_full) series.regime_label = RegimeLabel::low;
  try {
    series.validate();
  } catch (const std::exception& e) {
    throw CliError{kExitInput, path.string() + ": " + e.what()};
  }
  return series;
}

// ---------------------------------------------------------------- ingest

std::string render_profile_csv(const ActivityProfile& profile) {
  std::ostringstream out;
  out << "# manifest = " << kManifestName << "\n";
  out << "bin,start_ms,total,r_minus2,r_minus1,r_0,r_plus1,r_plus2,beyond\n";
  for (int bin = 0; bin < ActivityProfile::kBins; ++bin) {
    out << bin << ',' << ActivityProfile::kSessionOpenMs + bin * ActivityProfile::kBinMs
        << ',' << profile.counts_total[static_cast<std::size_t>(bin)];
    for (int r = -2; r <= 2; ++r) {
      out << ',' << profile.counts_by_return_value.at(r)[static_cast<std::size_t>(bin)];
    }
    out << ',' << profile.counts_beyond[static_cast<std::size_t>(bin)] << "\n";
  }
  return std::move(out).str();
}

std::string render_empty_profile_csv() {
  std::ostringstream out;
  out << "# manifest = " << kManifestName << "\n";
  out << "bin,start_ms,total,r_minus2,r_minus1,r_0,r_plus1,r_plus2,beyond\n";
  for (int bin = 0; bin < ActivityProfile::kBins; ++bin) {
    out << bin << ',' << ActivityProfile::kSessionOpenMs + bin * ActivityProfile::kBinMs
        << ",0,0,0,0,0,0,0\n";
  }
  return std::move(out).str();
}

int run_ingest(const CommonOptions& opt) {
  if (opt.input.empty()) throw CliError{kExitInput, "ingest requires --input"};
  if (!fs::exists(opt.input)) {
    throw CliError{kExitInput, "input file not found: " + opt.input};
  }
  const std::string raw = read_file(opt.input);
  std::istringstream stream(raw);
  ParseResult parsed;
  try {
    parsed = parse_trades(stream);
  } catch (const std::invalid_argument& e) {
    throw CliError{kExitInput, opt.input + ": " + e.what()};
  }

  OutputSet outputs(opt.output);
  KeyValueReport report;
  report.add("manifest", std::string(kManifestName));
  report.add("input", opt.input);
  report.add("tick_size", opt.tick_size);
  report.add("records_parsed", static_cast<long>(parsed.records.size()));
  report.add("lines_rejected", static_cast<long>(parsed.errors.size()));
  for (const auto& issue : parsed.errors) {
    report.add("error[" + std::to_string(issue.line) + "]", issue.message);
  }
  for (std::size_t i = 0; i < parsed.warnings.size(); ++i) {
    report.add("warning[" + std::to_string(i + 1) + "]", parsed.warnings[i]);
  }

  RegimeSplit split;
  TickSeries high, low;
  if (!parsed.records.empty()) {
    split = split_regimes(parsed.records);
    high = build_tick_series(split.high, opt.tick_size, RegimeLabel::high);
    low = build_tick_series(split.low, opt.tick_size, RegimeLabel::low);
  } else {
    high.regime_label = RegimeLabel::high;
    low.regime_label = RegimeLabel::low;
  }
  report.add("trimmed_count", static_cast<long>(split.trimmed_count));
  report.add("out_of_session_count", static_cast<long>(split.out_of_session_count));
  for (const auto& [name, series] : {std::pair<const char*, const TickSeries&>{"high", high},
                                     {"low", low}}) {
    const std::string prefix = std::string(name) + "_";
    report.add(prefix + "spreads", static_cast<long>(series.total_spreads()));
    report.add(prefix + "returns", static_cast<long>(series.total_returns()));
    report.add(prefix + "segments", static_cast<long>(series.segments.size()));
    report.add(prefix + "dropped", static_cast<long>(series.dropped_count));
  }

  outputs.write("series_high.csv", render_series_csv(high));
  outputs.write("series_low.csv", render_series_csv(low));
  outputs.write("activity_profile.csv",
                parsed.records.empty()
                    ? render_empty_profile_csv()
                    : render_profile_csv(activity_profile(parsed.records, opt.tick_size)));
  outputs.write("ingest_report.txt", report.render());

  KeyValueReport manifest;
  manifest.add("input_digest[" + opt.input + "]", digest_string(raw));
  manifest.add("tick_size", opt.tick_size);
  outputs.finish("ingest", manifest);
  return 0;
}

// ---------------------------------------------------------------- calibrate

void add_estimate(KeyValueReport& report, const std::string& name,
                  const std::optional<double>& estimate, const std::optional<double>& se) {
  if (!estimate) {
    report.add(name + "_hat", std::string("undefined"));
    return;
  }
  report.add(name + "_hat", *estimate);
  report.add(name + "_se", *se);
  if (*se > 0.0) {
    const double z = *estimate / *se;
    report.add(name + "_z", z);
    report.add(name + "_stars", significance_stars(z));
  }
}

void add_symmetry(KeyValueReport& report, const std::string& name,
                  const SymmetryCheck& check) {
  report.add(name + "_plus_two", check.plus_two);
  report.add(name + "_minus_two", check.minus_two);
  if (check.z) {
    report.add(name + "_z", *check.z);
    report.add(name + "_flagged", std::string(check.flagged ? "yes" : "no"));
  } else {
    report.add(name + "_z", std::string("undefined"));
  }
}

int run_calibrate(const CommonOptions& opt) {
  if (opt.input.empty()) throw CliError{kExitInput, "calibrate requires --input"};
  if (!fs::exists(opt.input)) {
    throw CliError{kExitInput, "input file not found: " + opt.input};
  }
  if (!opt.model_set) {
    throw CliError{kExitInput, "calibrate requires --model ms or --model dcmm"};
  }
  if (opt.model != "ms" && opt.model != "dcmm") {
    throw CliError{kExitInput, "calibrate models are ms and dcmm, got " + opt.model};
  }
  const TickSeries series = read_series_csv(opt.input);

  KeyValueReport report;
  report.add("manifest", std::string(kManifestName));
  report.add("input", opt.input);
  report.add("model", opt.model);
  report.add("regime", regime_name(series.regime_label));

  CountEstimates counts;
  try {
    counts = estimate_counts(series);
  } catch (const std::invalid_argument& e) {
    throw CliError{kExitEstimation, opt.input + ": " + e.what()};
  }
  report.add("n_spread", counts.n_spread);
  report.add("n1", counts.n1);
  report.add("n11", counts.n11);
  report.add("n12", counts.n12);
  report.add("n21", counts.n21);
  report.add("n22", counts.n22);
  report.add("regime1_returns", counts.total_regime1);
  report.add("regime1_zeros", counts.zeros_regime1);
  report.add("regime4_returns", counts.total_regime4);
  report.add("regime4_zeros", counts.zeros_regime4);
  add_estimate(report, "pi1", counts.pi1_hat, counts.pi1_se);
  add_estimate(report, "p11", counts.p11_hat, counts.p11_se);
  add_estimate(report, "p21", counts.p21_hat, counts.p21_se);
  add_estimate(report, "theta1", counts.theta1_hat, counts.theta1_se);
  add_estimate(report, "theta4", counts.theta4_hat, counts.theta4_se);
  add_symmetry(report, "symmetry1", counts.symmetry_regime1);
  add_symmetry(report, "symmetry4", counts.symmetry_regime4);

  int exit_code = 0;
  if (opt.model == "dcmm") {
    const int p = opt.p_set ? opt.p : 1;
    report.add("p", static_cast<long>(p));
    LogitSample sample = logit_sample(series, p);
    report.add("logit_observations", static_cast<long>(sample.binary.size()));
    LogitFit fit;
    try {
      fit = fit_logit_irls(sample.binary, sample.windows, p);
    } catch (const std::invalid_argument& e) {
      throw CliError{kExitEstimation, std::string("logit fit: ") + e.what()};
    }
    report.add("logit_converged", std::string(fit.converged ? "yes" : "no"));
    report.add("logit_iterations", static_cast<long>(fit.iterations));
    if (!fit.diagnostic.empty()) report.add("logit_diagnostic", fit.diagnostic);
    report.add("log_likelihood", fit.log_likelihood);
    if (fit.converged) {
      add_estimate(report, "alpha1", fit.alpha1, fit.std_errors[0]);
      for (int i = 1; i <= p; ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "beta_%02d", i);
        add_estimate(report, name, fit.beta1[static_cast<std::size_t>(i - 1)],
                     fit.std_errors[static_cast<std::size_t>(i)]);
      }
      if (p >= 3) {
        std::vector<double> magnitudes;
        std::vector<long> lags;
        for (int i = 1; i <= p; ++i) {
          magnitudes.push_back(std::abs(fit.beta1[static_cast<std::size_t>(i - 1)]));
          lags.push_back(i);
        }
        const std::pair<long, long> window{opt.window.first,
                                           std::min<long>(opt.window.second, p)};
        try {
          const PowerLawFit decay = fit_power_law(magnitudes, lags, window);
          report.add("beta_decay_exponent", decay.exponent);
          report.add("beta_decay_se", decay.exponent_se);
          report.add("beta_decay_window", std::to_string(decay.range.first) + ":" +
                                              std::to_string(decay.range.second));
          report.add("beta_decay_points", static_cast<long>(decay.n_points));
        } catch (const std::invalid_argument& e) {
          report.add("beta_decay", std::string("unavailable: ") + e.what());
        }
      }
    } else {
      // estimation failure: report carries the diagnostic verbatim
      exit_code = kExitEstimation;
    }
  }

  OutputSet outputs(opt.output);
  outputs.write("calibrate_report.txt", report.render());
  KeyValueReport manifest;
  manifest.add("input_digest[" + opt.input + "]", digest_file(opt.input));
  manifest.add("model", opt.model);
  if (opt.model == "dcmm") {
    manifest.add("p", static_cast<long>(opt.p_set ? opt.p : 1));
    manifest.add("window", std::to_string(opt.window.first) + ":" +
                               std::to_string(opt.window.second));
  }
  outputs.finish("calibrate", manifest);
  return exit_code;
}

// ---------------------------------------------------------------- simulate

int run_simulate(const CommonOptions& opt, const ConfigFile& config) {
  const LoadedModel loaded = load_model(config, opt);
  config.reject_unconsumed();

  SimConfig sim;
  sim.model = loaded.model;
  sim.params = loaded.params;
  sim.length = static_cast<std::size_t>(opt.length);
  sim.n_runs = static_cast<int>(opt.runs);
  try {
    sim.validate();
  } catch (const std::invalid_argument& e) {
    throw CliError{kExitEstimation, std::string("validation: ") + e.what()};
  }

  OutputSet outputs(opt.output);
  KeyValueReport summary;
  summary.add("manifest", std::string(kManifestName));
  summary.add("model", model_name(loaded.model));
  summary.add("length", opt.length);
  summary.add("runs", opt.runs);
  summary.add("seed", std::to_string(opt.seed));
  summary.add("burn_in", static_cast<long>(sim.effective_burn_in()));
  summary.add("overlap", std::string(opt.overlap ? "on" : "off"));
  if (opt.runs == 1) {
    summary.add("note", std::string("single run: dispersion columns unavailable"));
  }

  const std::vector<long> dts{1, 16, 256};
  std::map<long, std::vector<double>> sigma_n, kappa;
  for (long i = 0; i < opt.runs; ++i) {
    SimConfig run_cfg = sim;
    run_cfg.seed = rng::derive_stream(opt.seed, static_cast<std::uint64_t>(i));
    const SimPath path = simulate_path(run_cfg);
    char name[40];
    std::snprintf(name, sizeof name, "path_%03ld.csv", i);
    std::ostringstream csv;
    csv << "# manifest = " << kManifestName << "\n";
    write_path_csv(path, csv);
    outputs.write(name, std::move(csv).str());

    const std::string run_key = "run[" + std::to_string(i) + "]";
    summary.add(run_key + ".seed", std::to_string(run_cfg.seed));
    for (long dt : dts) {
      try {
        const AggregateStats stats = aggregate_stats(path.returns, dt, opt.overlap);
        sigma_n[dt].push_back(stats.sigma_n);
        kappa[dt].push_back(stats.kappa);
        if (dt == 1) {
          summary.add(run_key + ".sigma", stats.sigma);
          summary.add(run_key + ".kappa", stats.kappa);
        }
      } catch (const std::exception&) {
        // window too long or degenerate for this path length; row omitted
      }
    }
  }

  const auto mean_sd = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return std::pair<double, double>{mean, sd};
  };
  for (long dt : dts) {
    if (sigma_n[dt].empty()) continue;
    const auto [sn_mean, sn_sd] = mean_sd(sigma_n[dt]);
    const auto [k_mean, k_sd] = mean_sd(kappa[dt]);
    const std::string prefix = "dt[" + std::to_string(dt) + "].";
    summary.add(prefix + "sigma_n_mean", sn_mean);
    summary.add(prefix + "kappa_mean", k_mean);
    if (opt.runs > 1) {
      summary.add(prefix + "sigma_n_sd", sn_sd);
      summary.add(prefix + "kappa_sd", k_sd);
    }
  }
  outputs.write("summary.txt", summary.render());

  KeyValueReport manifest;
  manifest.add("config_digest", digest_string(canonical_config(opt, loaded)));
  if (!opt.input.empty()) {
    manifest.add("input_digest[" + opt.input + "]", digest_string(config.source()));
  }
  manifest.add("seed", std::to_string(opt.seed));
  manifest.add("burn_in", static_cast<long>(sim.effective_burn_in()));
  manifest.add("overlap", std::string(opt.overlap ? "on" : "off"));
  outputs.finish("simulate", manifest);
  return 0;
}

// ---------------------------------------------------------------- verify

struct VerifyRow {
  std::string series;
  long tau;
  double analytic;
  double estimate;
  double se;
  bool pass;
};

// Moving-block standard error for an autocorrelation estimate at lag tau:
// 1/sqrt(n) inflated by the estimated correlations below tau.
double acf_se(const AcfEstimate& acf, long tau, std::size_t n) {
  double sum = 0.0;
  for (long j = 1; j < tau; ++j) {
    const double rho = acf.values[static_cast<std::size_t>(j)];
    sum += rho * rho;
  }
  return std::sqrt((1.0 + 2.0 * sum) / static_cast<double>(n));
}

int run_verify(const CommonOptions& opt, const ConfigFile& config) {
  if (opt.model_set && opt.model == "dcmm" && opt.p_set && opt.p > 12) {
    throw CliError{kExitInput, "analytic comparison is capped at p = 12; got p = " +
                                   std::to_string(opt.p)};
  }
  const LoadedModel loaded = load_model(config, opt);
  config.reject_unconsumed();

  SimConfig sim;
  sim.model = loaded.model;
  sim.params = loaded.params;
  sim.length = static_cast<std::size_t>(opt.length);
  sim.n_runs = 1;
  sim.seed = opt.seed;
  try {
    sim.validate();
  } catch (const std::invalid_argument& e) {
    throw CliError{kExitEstimation, std::string("validation: ") + e.what()};
  }

  const SimPath path = simulate_path(sim);
  std::vector<double> returns, squared;
  returns.reserve(path.returns.size());
  squared.reserve(path.returns.size());
  for (const Return& r : path.returns) {
    const double v = static_cast<double>(r.half_ticks());
    returns.push_back(v);
    squared.push_back(v * v);
  }

  std::vector<VerifyRow> rows;
  const auto add_rows = [&](const std::string& name, const std::vector<double>& series,
                            const std::function<double(long)>& analytic) {
    const AcfEstimate acf = sample_acf(series, opt.max_lag);
    for (long tau = 1; tau <= opt.max_lag; ++tau) {
      VerifyRow row;
      row.series = name;
      row.tau = tau;
      row.analytic = analytic(tau);
      row.estimate = acf.values[static_cast<std::size_t>(tau)];
      row.se = acf_se(acf, tau, series.size());
      row.pass = std::abs(row.analytic - row.estimate) <= 3.0 * row.se;
      rows.push_back(row);
    }
  };

  double e3_closed = 0.0, e3_spectrum = 0.0;
  bool has_e3 = false;
  try {
    if (std::holds_alternative<MsParams>(loaded.params)) {
      const auto& params = std::get<MsParams>(loaded.params);
      add_rows("returns", returns, [&](long tau) { return acf_returns(params, tau); });
      add_rows("squared", squared, [&](long tau) { return acf_squared(params, tau); });
    } else {
      const auto& params = std::get<DcmmParams>(loaded.params);
      add_rows("squared", squared,
               [&](long tau) { return acf_squared_dcmm(params, tau); });
      if (params.p == 1) {
        e3_closed = e3_closed_form(params);
        const SquaredReturnChain chain = build_squared_chain(params);
        // modulus order (1, e3, 0): the middle eigenvalue is the decay rate
        e3_spectrum = spectrum(chain.S)[1].real();
        has_e3 = true;
      }
    }
  } catch (const std::invalid_argument& e) {
    throw CliError{kExitEstimation, std::string("analytic path: ") + e.what()};
  } catch (const std::domain_error& e) {
    throw CliError{kExitEstimation, std::string("analytic path: ") + e.what()};
  }

  bool overall = true;
  std::ostringstream table;
  table << "# manifest = " << kManifestName << "\n";
  table << "series,tau,analytic,estimate,se,status\n";
  long failed = 0;
  for (const auto& row : rows) {
    overall = overall && row.pass;
    if (!row.pass) ++failed;
    table << row.series << ',' << row.tau << ',' << format_double(row.analytic) << ','
          << format_double(row.estimate) << ',' << format_double(row.se) << ','
          << (row.pass ? "pass" : "fail") << "\n";
  }
  if (has_e3) {
    const bool pass = std::abs(e3_closed - e3_spectrum) <= 1e-10;
    overall = overall && pass;
    if (!pass) ++failed;
    table << "e3,0," << format_double(e3_closed) << ',' << format_double(e3_spectrum)
          << ",0," << (pass ? "pass" : "fail") << "\n";
  }

  OutputSet outputs(opt.output);
  outputs.write("verify_table.csv", std::move(table).str());
  KeyValueReport report;
  report.add("manifest", std::string(kManifestName));
  report.add("model", model_name(loaded.model));
  report.add("length", opt.length);
  report.add("seed", std::to_string(opt.seed));
  report.add("max_lag", opt.max_lag);
  report.add("rows", static_cast<long>(rows.size() + (has_e3 ? 1 : 0)));
  report.add("rows_failed", failed);
  report.add("overall", std::string(overall ? "pass" : "fail"));
  outputs.write("verify_report.txt", report.render());

  KeyValueReport manifest;
  manifest.add("config_digest", digest_string(canonical_config(opt, loaded)));
  if (!opt.input.empty()) {
    manifest.add("input_digest[" + opt.input + "]", digest_string(config.source()));
  }
  manifest.add("seed", std::to_string(opt.seed));
  manifest.add("max_lag", opt.max_lag);
  outputs.finish("verify", manifest);
  return overall ? 0 : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov-switching spread/mid-price models: simulate, calibrate, verify"};
  app.require_subcommand(1);

  CommonOptions opt;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--input", opt.input, "input file")->required();
    cmd->add_option("--output", opt.output, "output directory")->required();
    return cmd;
  };

  CLI::App* ingest = add_common(app.add_subcommand("ingest", "parse trades, split regimes"));
  ingest->add_option("--tick-size", opt.tick_size, "price grid step")
      ->check(CLI::PositiveNumber);

  CLI::App* calibrate =
      add_common(app.add_subcommand("calibrate", "count and logit estimates"));
  calibrate->add_option("--model", opt.model, "ms or dcmm")
      ->check(CLI::IsMember({"ms", "dcmm"}));
  calibrate->add_option("--p", opt.p, "logit order")->check(CLI::NonNegativeNumber);
  calibrate->add_option("--window", opt.window_raw, "power-law fit window lo:hi");

  CLI::App* simulate =
      add_common(app.add_subcommand("simulate", "sample paths and summaries"));
  CLI::App* verify =
      add_common(app.add_subcommand("verify", "analytic vs Monte Carlo table"));
  for (CLI::App* cmd : {simulate, verify}) {
    cmd->add_option("--model", opt.model, "msb, ms, or dcmm")
        ->check(CLI::IsMember({"msb", "ms", "dcmm"}));
    cmd->add_option("--p", opt.p, "model order")->check(CLI::NonNegativeNumber);
    cmd->add_option("--length", opt.length, "path length")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", opt.seed, "master seed");
  }
  simulate->add_option("--runs", opt.runs, "ensemble size")->check(CLI::PositiveNumber);
  simulate->add_option("--overlap", opt.overlap_raw, "overlapping aggregation on|off")
      ->check(CLI::IsMember({"on", "off"}));
  verify->add_option("--max-lag", opt.max_lag, "largest compared lag")
      ->check(CLI::PositiveNumber);
  calibrate->add_option("--seed", opt.seed, "master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  }

  try {
    opt.model_set = !opt.model.empty();
    for (CLI::App* cmd : {simulate, verify, calibrate}) {
      if (cmd->parsed()) {
        opt.p_set = cmd->count("--p") > 0;
        opt.seed_set = cmd->count("--seed") > 0;
      }
    }
    for (CLI::App* cmd : {simulate, verify}) {
      if (cmd->parsed()) opt.length_set = cmd->count("--length") > 0;
    }
    if (simulate->parsed()) opt.runs_set = simulate->count("--runs") > 0;
    if (verify->parsed()) opt.max_lag_set = verify->count("--max-lag") > 0;
    if (!opt.window_raw.empty()) {
      opt.window = parse_window(opt.window_raw);
      opt.window_set = true;
    }
    if (!opt.overlap_raw.empty()) {
      opt.overlap = opt.overlap_raw == "on";
      opt.overlap_set = true;
    }

    if (ingest->parsed()) {
      apply_seed_fallback(opt);
      return run_ingest(opt);
    }
    if (calibrate->parsed()) {
      apply_seed_fallback(opt);
      return run_calibrate(opt);
    }

    // simulate and verify read model parameters from the config file
    ConfigFile config;
    if (!opt.input.empty()) {
      if (!fs::exists(opt.input)) {
        throw CliError{kExitInput, "input file not found: " + opt.input};
      }
      config = ConfigFile::load(opt.input);
    }
    merge_config(opt, config);
    apply_seed_fallback(opt);
    if (simulate->parsed()) return run_simulate(opt, config);
    return run_verify(opt, config);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEstimation;
  }
}
