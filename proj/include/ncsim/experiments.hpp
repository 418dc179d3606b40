// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ncsim/scenario.hpp"
#include "ncsim/simnet.hpp"

namespace ncsim {

/// Header plus numeric rows, written with shortest round-trip decimals.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    friend bool operator==(const CsvTable&, const CsvTable&) = default;
};

std::string to_csv(const CsvTable& table);
/// Throws ConfigError on malformed text.
CsvTable parse_csv(std::string_view text);
/// Throws IoError.
void write_text(const std::string& path, std::string_view text);
std::string read_text(const std::string& path);

// ---- Throughput sweep --------------------------------------------------

std::vector<double> default_per_grid();

struct SweepPoint {
    double per = 0.0;
    double nc_segs_per_s = 0.0;
    double tcp_segs_per_s = 0.0;
};

/// One NC-enabled and one plain TCP single-flow run (A1 -> S1) per PER value.
/// Points run concurrently; the result is in the order of `pers`.
std::vector<SweepPoint> run_throughput_sweep(const ScenarioConfig& base, const std::vector<double>& pers);
CsvTable sweep_table(const std::vector<SweepPoint>& points);

// ---- Fairness ----------------------------------------------------------

enum class Fairness { NcVsTcp, NcVsNc, TcpVsTcp };

Fairness parse_fairness(std::string_view name);
std::string_view fairness_name(Fairness f);

/// Erasure rate the fairness experiments use unless told otherwise.
inline constexpr double default_fairness_per = 0.05;
/// Start offset of the second flow.
inline constexpr double fairness_stagger_s = 10.0;

/// Two flows A1 -> S1 (flow 1) and A2 -> S2 (flow 2) on the shared
/// bottleneck. Flow 1 starts at 0 and flow 2 after the stagger; in NcVsTcp
/// flow 1 is the plain TCP flow.
ScenarioConfig fairness_config(const ScenarioConfig& base, Fairness f);

struct FairnessResult {
    Metrics metrics;
    double flow1_mean = 0.0;
    double flow2_mean = 0.0;
};

FairnessResult run_fairness(const ScenarioConfig& base, Fairness f);
CsvTable fairness_table(const Metrics& metrics);

/// Per-second series of every flow of a single run.
CsvTable series_table(const Metrics& metrics);

/// Segments per second the bottleneck carries when filled with full-size
/// plain TCP segments.
double bottleneck_capacity_segs_per_s(const ScenarioConfig& config);

// ---- Codec property suite ----------------------------------------------

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

std::vector<CheckResult> verify_codec(std::uint64_t seed);

} // namespace ncsim
