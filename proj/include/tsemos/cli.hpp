#pragma once

#include "tsemos/data.hpp"
#include "tsemos/models.hpp"
#include "tsemos/synthetic.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tsemos {

struct RunConfig {
    std::filesystem::path data_dir = "data";
    std::filesystem::path out_dir = "out";
    std::vector<ModelKind> models{std::begin(kAllModels), std::end(kAllModels)};
    // Empty selects every lead/station found in the data.
    std::vector<int> leads;
    std::vector<std::string> stations;
    Date train_start = Date{std::chrono::year{2015} / 1 / 1};
    Date train_end = Date{std::chrono::year{2019} / 12 / 31};
    Date valid_start = Date{std::chrono::year{2020} / 1 / 1};
    Date valid_end = Date{std::chrono::year{2020} / 12 / 31};
    std::uint64_t seed = 1;
    int max_iter = 500;
    bool analytic_gradient = false;

    // simulate
    int n_stations = 3;
    int n_days = 2192;
    int members = 50;
    Date sim_start = Date{std::chrono::year{2015} / 1 / 1};
    SyntheticScenario scenario = SyntheticScenario::Sar;

    // verify
    int pit_bins = 10;
    double alpha = 0.05;
    std::vector<int> lb_lags{1, 5, 10};
};

/// Throws InvalidConfig when the date ranges overlap or are out of order, or
/// when no model is selected.
void validate(const RunConfig& config);

[[nodiscard]] FitOptions fit_options(const RunConfig& config);

/// Seed for one synthetic (station, lead) series derived from the run seed.
[[nodiscard]] std::uint64_t series_seed(std::uint64_t seed, int station, int lead_time_h);

/// Writes <out>/<station>_<lead>.csv and <out>/truth_<station>_<lead>.csv.
void cmd_simulate(const RunConfig& config);
/// Writes <out>/models/<MODEL>_<station>_<lead>.json.
void cmd_fit(const RunConfig& config);
/// Writes <out>/predictions.csv: date,station_id,lead_time_h,model,mu,sigma.
void cmd_predict(const RunConfig& config);
/// Writes scores.csv, summary.csv, significance.csv, pit.csv and
/// residual_dependence.csv into <out>.
void cmd_verify(const RunConfig& config);

/// Entry point; returns the process exit code (0 ok, 2 config, 3 data, 4 numerical).
int run_cli(int argc, char** argv);

}  // namespace tsemos
