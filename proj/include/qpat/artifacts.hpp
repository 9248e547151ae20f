#pragma once

// Stage artifact formats. All CSV files carry one header line; doubles are
// written in shortest round-trip form so reading an artifact back reproduces
// the in-memory values bit for bit.

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "qpat/backtest.hpp"
#include "qpat/baselines.hpp"
#include "qpat/quality_filter.hpp"
#include "json.hpp"

namespace qpat::artifacts {

inline constexpr int kSchemaVersion = 1;

// id,origin_iso8601,label,pnl_raw,f0..f31
void write_patterns_csv(std::ostream& out, std::span<const Pattern> patterns);
std::vector<Pattern> read_patterns_csv(std::istream& in);

/// {"schema_version": 1, "patterns": [{id, origin, label, pnl_raw, features}]}
nlohmann::json patterns_to_json(std::span<const Pattern> patterns);
std::vector<Pattern> patterns_from_json(const nlohmann::json& doc);

// pattern columns + h_local,info_gain,pnl_norm,score
void write_scored_csv(std::ostream& out, std::span<const ScoredPattern> scored);
std::vector<ScoredPattern> read_scored_csv(std::istream& in);

// scored columns + admitted,blocked_by
void write_filtered_csv(std::ostream& out, const FilteredLibrary& library);

/// Rebuilds a library from its decision rows; config comes from the summary.
FilteredLibrary read_filtered_csv(std::istream& in, const FilterConfig& config);

nlohmann::json filter_summary(const FilteredLibrary& library, const VerifyReport& report);
FilterConfig filter_config_from_summary(const nlohmann::json& summary);

// entry_time,direction,entry_price,exit_time,exit_price,outcome,pnl
void write_trades_csv(std::ostream& out, std::span<const TradeRecord> trades);
// time,capital
void write_equity_csv(std::ostream& out, const EquityCurve& curve);

nlohmann::json summary_to_json(const EquitySummary& s);
nlohmann::json sweep_to_json(std::span<const SweepCell> cells);

// id,label,pc1,pc2
void write_projection_csv(std::ostream& out, std::span<const Pattern> patterns,
                          std::span<const std::array<double, 2>> coordinates);

nlohmann::json balance_to_json(std::span<const BalanceRow> rows);

}  // namespace qpat::artifacts
