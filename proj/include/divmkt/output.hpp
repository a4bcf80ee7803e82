#pragma once

// JSON, CSV and SVG renderings of verdicts and simulation reports.

#include <json.hpp>
#include <ostream>

#include "divmkt/classify.hpp"
#include "divmkt/feller.hpp"
#include "divmkt/simulate.hpp"

namespace divmkt {

// Finite values as numbers, otherwise "+inf", "-inf" or "nan".
nlohmann::json extended_real(double v);

nlohmann::json to_json(const DivergenceVerdict& v);
nlohmann::json to_json(const DiversityVerdict& v);
nlohmann::json to_json(const EndpointReport& r);
nlohmann::json to_json(const FellerReport& r);
nlohmann::json to_json(const SimParams& p);
// Every MonteCarloReport field except the raw trajectories.
nlohmann::json to_json(const MonteCarloReport& r);
nlohmann::json to_json(const ItoConsistencyReport& r);

// Header: path,step,time,stock,weight
void write_trajectories_csv(std::ostream& out, const MonteCarloReport& r);

// Max weight over time for up to `max_paths` recorded paths with a
// horizontal line at 1 - delta. Fixed 800x500 viewport.
void write_max_weight_svg(std::ostream& out, const MonteCarloReport& r, std::size_t max_paths);

}  // namespace divmkt
