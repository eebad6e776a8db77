#pragma once

// File formats. Doubles are written in shortest round-trip form, so equal
// inputs give byte-identical files.
//
//   trajectory CSV   t,y          initial state row, then one row per event
//   occupation CSV   k,time       k = 0..k_max, then ">k_max" for the pool
//   occupancy table  k,mc_mean,mc_stderr,theory,z
//   growth JSON      {q, t_min, h_q_measure, bound_value, first_violation_after}

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "mginf/analysis.hpp"
#include "mginf/classifier.hpp"
#include "mginf/simulator.hpp"

namespace mginf {

std::string format_double(double x);

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);
void write_occupation_csv(std::ostream& os, const OccupationRecord& record);
void write_occupancy_table_csv(std::ostream& os, const MonteCarloSummary& summary);

nlohmann::json to_json(const GrowthReport& report);
nlohmann::json to_json(const ClassificationResult& result, bool include_trace = false);
nlohmann::json to_json(const MonteCarloSummary& summary);
nlohmann::json to_json(const LiminfReport& report);

}  // namespace mginf
