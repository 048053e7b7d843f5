#include "tickms/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace tickms {
namespace {

constexpr long kDayMs = 86'400'000;
constexpr long kTrimMs = 360'000;  // six minutes
constexpr long kHighOpenMs = ActivityProfile::kSessionOpenMs + kTrimMs;    // 09:36
constexpr long kLowOpenMs = 37'800'000;                                           // 10:30
constexpr long kLowCloseMs = 56'700'000;                                          // 15:45
constexpr long kHighCloseMs = ActivityProfile::kSessionCloseMs - kTrimMs;  // 15:54

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

bool parse_long(const std::string& text, long& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end;
}

bool parse_double(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end && std::isfinite(out);
}

// ISO date YYYY-MM-DD to a yyyymmdd ordering key.
bool parse_date(const std::string& text, int& out) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  for (const std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  const int year = std::stoi(text.substr(0, 4));
  const int month = std::stoi(text.substr(5, 2));
  const int day = std::stoi(text.substr(8, 2));
  if (month < 1 || month > 12 || day < 1 || day > 31) return false;
  out = year * 10000 + month * 100 + day;
  return true;
}

bool parse_side(const std::string& text, TradeSide& out) {
  if (text == "buy") {
    out = TradeSide::buy;
  } else if (text == "sell") {
    out = TradeSide::sell;
  } else if (text == "unknown") {
    out = TradeSide::unknown;
  } else {
    return false;
  }
  return true;
}

long spread_ticks(const TradeRecord& record, double tick_size) {
  return std::lround((record.ask - record.bid) / tick_size);
}

double mid_price(const TradeRecord& record) { return (record.bid + record.ask) / 2.0; }

long half_tick_return(double mid_prev, double mid_next, double tick_size) {
  return std::lround(2.0 * (mid_next - mid_prev) / tick_size);
}

}  // namespace

ParseResult parse_trades(std::istream& in) {
  ParseResult result;
  std::string line;
  std::size_t line_number = 0;

  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line != "date,timestamp_ms,price,volume,side,bid,ask") {
      throw std::invalid_argument(
          "parse_trades: expected header date,timestamp_ms,price,volume,side,bid,ask");
    }
    have_header = true;
    break;
  }
  if (!have_header) {
    result.warnings.push_back("empty file: no header or data");
    return result;
  }

  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    const auto fields = split_fields(line);
    if (fields.size() != 7) {
      result.errors.push_back({line_number, "expected 7 fields, got " +
                                                std::to_string(fields.size())});
      continue;
    }

    TradeRecord record;
    if (!parse_date(fields[0], record.date)) {
      result.errors.push_back({line_number, "bad date '" + fields[0] + "'"});
      continue;
    }
    if (!parse_long(fields[1], record.timestamp_ms) || record.timestamp_ms < 0 ||
        record.timestamp_ms >= kDayMs) {
      result.errors.push_back({line_number, "bad timestamp_ms '" + fields[1] + "'"});
      continue;
    }
    if (!parse_double(fields[2], record.price) || record.price <= 0.0) {
      result.errors.push_back({line_number, "bad price '" + fields[2] + "'"});
      continue;
    }
    if (!parse_long(fields[3], record.volume) || record.volume < 0) {
      result.errors.push_back({line_number, "bad volume '" + fields[3] + "'"});
      continue;
    }
    if (!parse_side(fields[4], record.side)) {
      result.errors.push_back({line_number, "bad side '" + fields[4] + "'"});
      continue;
    }
    if (!parse_double(fields[5], record.bid) || !parse_double(fields[6], record.ask)) {
      result.errors.push_back({line_number, "bad quote '" + fields[5] + "," + fields[6] + "'"});
      continue;
    }
    if (record.ask < record.bid) {
      result.errors.push_back({line_number, "crossed quotes: ask " + fields[6] + " < bid " +
                                                fields[5]});
      continue;
    }
    result.records.push_back(record);
  }

  const auto key = [](const TradeRecord& r) { return std::make_pair(r.date, r.timestamp_ms); };
  const bool sorted = std::is_sorted(
      result.records.begin(), result.records.end(),
      [&](const TradeRecord& a, const TradeRecord& b) { return key(a) < key(b); });
  if (!sorted) {
    result.warnings.push_back("records not in (date, timestamp) order; stable-sorted");
    std::stable_sort(result.records.begin(), result.records.end(),
                     [&](const TradeRecord& a, const TradeRecord& b) { return key(a) < key(b); });
  }

  // Multi-fill collapse: consecutive records with one clock key keep the
  // final quote state.
  std::vector<TradeRecord> collapsed;
  collapsed.reserve(result.records.size());
  for (const auto& record : result.records) {
    if (!collapsed.empty()) {
      const auto& last = collapsed.back();
      if (last.date == record.date && last.timestamp_ms == record.timestamp_ms &&
          last.side == record.side) {
        collapsed.back() = record;
        continue;
      }
    }
    collapsed.push_back(record);
  }
  result.records = std::move(collapsed);
  return result;
}

TickSeries TickSeries::single_segment(const std::vector<SpreadState>& spreads,
                                      const std::vector<Return>& returns) {
  if (spreads.size() != returns.size() + 1) {
    throw std::invalid_argument("TickSeries: need exactly one more spread than returns");
  }
  TickSegment segment;
  segment.spreads = spreads;
  segment.returns = returns;
  segment.dates.assign(spreads.size(), 19700101);
  segment.timestamps_ms.resize(spreads.size());
  for (std::size_t i = 0; i < spreads.size(); ++i) {
    segment.timestamps_ms[i] =
        static_cast<long>(std::min<std::size_t>(i, static_cast<std::size_t>(kDayMs) - 1));
  }
  TickSeries series;
  series.segments.push_back(std::move(segment));
  series.validate();
  return series;
}

std::size_t TickSeries::total_spreads() const {
  std::size_t total = 0;
  for (const auto& segment : segments) total += segment.spreads.size();
  return total;
}

std::size_t TickSeries::total_returns() const {
  std::size_t total = 0;
  for (const auto& segment : segments) total += segment.returns.size();
  return total;
}

void TickSeries::validate() const {
  for (const auto& segment : segments) {
    if (segment.spreads.empty()) throw std::invalid_argument("TickSeries: empty segment");
    if (segment.returns.size() + 1 != segment.spreads.size() ||
        segment.dates.size() != segment.spreads.size() ||
        segment.timestamps_ms.size() != segment.spreads.size()) {
      throw std::invalid_argument("TickSeries: misaligned segment vectors");
    }
    for (std::size_t t = 0; t < segment.returns.size(); ++t) {
      const auto x = encode_transition(segment.spreads[t], segment.spreads[t + 1]);
      if (!allowed_returns(x).contains(segment.returns[t].half_ticks())) {
        throw SupportViolation("TickSeries: return outside regime support");
      }
      if (segment.dates[t] != segment.dates[t + 1]) {
        throw std::invalid_argument("TickSeries: return spans a day boundary");
      }
      if (segment.timestamps_ms[t] > segment.timestamps_ms[t + 1]) {
        throw std::invalid_argument("TickSeries: timestamps decrease within a segment");
      }
    }
  }
}

TickSeries build_tick_series(const std::vector<TradeRecord>& records, double tick_size,
                             RegimeLabel label) {
  if (!(tick_size > 0.0) || !std::isfinite(tick_size)) {
    throw std::invalid_argument("build_tick_series: tick_size must be positive");
  }

  TickSeries series;
  series.regime_label = label;
  TickSegment current;
  double previous_mid = 0.0;

  const auto close_segment = [&] {
    if (!current.spreads.empty()) series.segments.push_back(std::move(current));
    current = TickSegment{};
  };

  for (const auto& record : records) {
    const long ticks = spread_ticks(record, tick_size);
    if (ticks != 1 && ticks != 2) {
      series.dropped_count += 1;
      close_segment();
      continue;
    }
    const SpreadState spread(static_cast<int>(ticks));
    const double mid = mid_price(record);

    if (!current.spreads.empty() && current.dates.back() != record.date) close_segment();

    if (current.spreads.empty()) {
      current.spreads.push_back(spread);
      current.dates.push_back(record.date);
      current.timestamps_ms.push_back(record.timestamp_ms);
      previous_mid = mid;
      continue;
    }

    const long r = half_tick_return(previous_mid, mid, tick_size);
    const bool in_alphabet = r >= -2 && r <= 2;
    const bool supported =
        in_alphabet &&
        allowed_returns(encode_transition(current.spreads.back(), spread)).contains(
            static_cast<int>(r));
    if (!supported) {
      series.dropped_count += 1;
      close_segment();
      continue;
    }

    current.spreads.push_back(spread);
    current.returns.push_back(Return(static_cast<int>(r)));
    current.dates.push_back(record.date);
    current.timestamps_ms.push_back(record.timestamp_ms);
    previous_mid = mid;
  }
  close_segment();
  series.validate();
  return series;
}

RegimeSplit split_regimes(const std::vector<TradeRecord>& records) {
  RegimeSplit split;
  for (const auto& record : records) {
    const long t = record.timestamp_ms;
    if (t < ActivityProfile::kSessionOpenMs || t > ActivityProfile::kSessionCloseMs) {
      split.out_of_session_count += 1;
    } else if ((t > kHighOpenMs && t < kLowOpenMs) || (t > kLowCloseMs && t < kHighCloseMs)) {
      split.high.push_back(record);
    } else if (t >= kLowOpenMs && t <= kLowCloseMs) {
      split.low.push_back(record);
    } else {
      split.trimmed_count += 1;
    }
  }
  return split;
}

ActivityProfile activity_profile(const std::vector<TradeRecord>& records, double tick_size) {
  if (!(tick_size > 0.0) || !std::isfinite(tick_size)) {
    throw std::invalid_argument("activity_profile: tick_size must be positive");
  }
  if (records.empty()) throw std::invalid_argument("activity_profile: no records");

  ActivityProfile profile;
  for (int r = -2; r <= 2; ++r) profile.counts_by_return_value[r] = {};

  const auto bin_of = [](long t) -> int {
    if (t < ActivityProfile::kSessionOpenMs || t >= ActivityProfile::kSessionCloseMs) return -1;
    return static_cast<int>((t - ActivityProfile::kSessionOpenMs) / ActivityProfile::kBinMs);
  };

  for (std::size_t i = 0; i < records.size(); ++i) {
    const int bin = bin_of(records[i].timestamp_ms);
    if (bin < 0) continue;
    profile.counts_total[static_cast<std::size_t>(bin)] += 1;

    if (i == 0 || records[i - 1].date != records[i].date) continue;
    const long r =
        half_tick_return(mid_price(records[i - 1]), mid_price(records[i]), tick_size);
    if (r >= -2 && r <= 2) {
      profile.counts_by_return_value[static_cast<int>(r)][static_cast<std::size_t>(bin)] += 1;
    } else {
      profile.counts_beyond[static_cast<std::size_t>(bin)] += 1;
    }
  }
  return profile;
}

}  // namespace tickms
