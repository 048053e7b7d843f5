#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tickms/core.hpp"

namespace tickms {

enum class TradeSide { buy, sell, unknown };

// One execution record with the quote attached to it. Dates are yyyymmdd
// keys, timestamps milliseconds since midnight.
struct TradeRecord {
  int date = 0;
  long timestamp_ms = 0;
  double price = 0.0;
  long volume = 0;
  TradeSide side = TradeSide::unknown;
  double bid = 0.0;
  double ask = 0.0;
};

struct ParseIssue {
  std::size_t line = 0;
  std::string message;
};

// Records in nondecreasing (date, timestamp) order; rejected lines and
// file-level conditions are reported, not thrown. Only a malformed header is
// a hard error.
struct ParseResult {
  std::vector<TradeRecord> records;
  std::vector<ParseIssue> errors;
  std::vector<std::string> warnings;
};

// Header contract, bit-exact: date,timestamp_ms,price,volume,side,bid,ask
// with ISO dates, side in {buy,sell,unknown}, ask >= bid. Out-of-order input
// is stable-sorted with a warning; consecutive records sharing
// (date, timestamp, side) collapse to the last one, modeling a market order
// that swept several levels as a single clock tick.
ParseResult parse_trades(std::istream& in);

enum class RegimeLabel { high, low, full };

// A maximal run of events with no dropped record or day boundary inside, so
// every consecutive pair yields a valid (transition, return) observation.
struct TickSegment {
  std::vector<SpreadState> spreads;
  std::vector<Return> returns;
  std::vector<int> dates;
  std::vector<long> timestamps_ms;
};

struct TickSeries {
  std::vector<TickSegment> segments;
  RegimeLabel regime_label = RegimeLabel::full;
  std::size_t dropped_count = 0;

  // Synthetic single-segment series over model output, with sequential
  // timestamps; lets calibration run on simulated paths.
  static TickSeries single_segment(const std::vector<SpreadState>& spreads,
                                   const std::vector<Return>& returns);

  [[nodiscard]] std::size_t total_spreads() const;
  [[nodiscard]] std::size_t total_returns() const;
  void validate() const;
};

// Spread = round((ask-bid)/tick_size) ticks; return = round of the mid-price
// change in half-ticks. Events with a spread outside {1,2}, a return outside
// {-2..2}, or a (transition, return) pair violating the support rule are
// dropped and the series splits there; day boundaries split without
// dropping. Requires tick_size > 0.
TickSeries build_tick_series(const std::vector<TradeRecord>& records, double tick_size,
                             RegimeLabel label = RegimeLabel::full);

// Session trimming and activity split. The first and last six minutes of the
// 9:30-16:00 session are discarded; remaining records route to the high set
// (9:36, 10:30) and (15:45, 15:54), or the low set [10:30, 15:45]. Records
// outside the session are rejected and counted.
struct RegimeSplit {
  std::vector<TradeRecord> high;
  std::vector<TradeRecord> low;
  std::size_t trimmed_count = 0;
  std::size_t out_of_session_count = 0;
};
RegimeSplit split_regimes(const std::vector<TradeRecord>& records);

// Arrival counts in 6-minute session bins, total and conditioned on the
// realized half-tick return (computed against the previous same-day record).
// Records outside the session are ignored; totals sum to the in-session
// record count.
struct ActivityProfile {
  static constexpr long kBinMs = 360'000;
  static constexpr int kBins = 65;
  static constexpr long kSessionOpenMs = 34'200'000;   // 09:30
  static constexpr long kSessionCloseMs = 57'600'000;  // 16:00

  std::array<std::size_t, kBins> counts_total{};
  std::map<int, std::array<std::size_t, kBins>> counts_by_return_value;  // keys -2..2
  std::array<std::size_t, kBins> counts_beyond{};
};
ActivityProfile activity_profile(const std::vector<TradeRecord>& records, double tick_size);

}  // namespace tickms
