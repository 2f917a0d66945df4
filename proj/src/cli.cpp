#include "tsemos/cli.hpp"

#include "tsemos/error.hpp"
#include "tsemos/log.hpp"
#include "tsemos/model_io.hpp"
#include "tsemos/synthetic.hpp"
#include "tsemos/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

namespace tsemos {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& text, std::string_view what) {
    std::vector<int> out;
    for (const std::string& s : split_list(text)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(s, &used));
            if (used != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidConfig, "invalid " + std::string(what) + " '" + s + "'");
        }
    }
    return out;
}

Date config_date(const std::string& text, std::string_view key) {
    try {
        return parse_date(text);
    } catch (const Error&) {
        throw Error(ErrorCode::InvalidConfig, std::string(key) + ": invalid date '" + text + "'");
    }
}

std::string series_name(const std::string& station, int lead) { return station + "_" + std::to_string(lead); }

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IOError, "cannot create directory " + dir.string());
}

// Every station/lead group found in the data directory, filtered and sorted.
std::vector<StationSeries> load_data(const RunConfig& config) {
    if (!fs::is_directory(config.data_dir)) {
        throw Error(ErrorCode::IOError, "data directory not found: " + config.data_dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(config.data_dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && entry.path().extension() == ".csv" && !name.starts_with("truth_")) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<StationSeries> out;
    for (const fs::path& f : files) {
        for (StationSeries& s : read_station_csv(f)) {
            const bool station_ok = config.stations.empty() || std::find(config.stations.begin(), config.stations.end(),
                                                                         s.station_id) != config.stations.end();
            const bool lead_ok = config.leads.empty() ||
                                 std::find(config.leads.begin(), config.leads.end(), s.lead_time_h) != config.leads.end();
            if (station_ok && lead_ok) out.push_back(std::move(s));
        }
    }
    std::sort(out.begin(), out.end(), [](const StationSeries& a, const StationSeries& b) {
        return std::tie(a.station_id, a.lead_time_h) < std::tie(b.station_id, b.lead_time_h);
    });
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].station_id == out[i - 1].station_id && out[i].lead_time_h == out[i - 1].lead_time_h) {
            throw Error(ErrorCode::ParseError,
                        "duplicate series " + series_name(out[i].station_id, out[i].lead_time_h));
        }
    }
    for (const std::string& st : config.stations) {
        for (int lead : config.leads) {
            const bool found = std::any_of(out.begin(), out.end(), [&](const StationSeries& s) {
                return s.station_id == st && s.lead_time_h == lead;
            });
            if (!found) throw Error(ErrorCode::InvalidInput, "no data for " + series_name(st, lead));
        }
    }
    if (out.empty()) throw Error(ErrorCode::InvalidInput, "no station data found in " + config.data_dir.string());
    return out;
}

// Imputed rows [first, last]; both ends must be present in the data.
StationSeries covered_range(const StationSeries& series, Date first, Date last, std::string_view what) {
    if (!series.index_of(first) || !series.index_of(last)) {
        throw Error(ErrorCode::InvalidInput, std::string(what) + " " + format_date(first) + ".." + format_date(last) +
                                                 " is not covered for " +
                                                 series_name(series.station_id, series.lead_time_h));
    }
    return imputed(series.between(first, last));
}

fs::path model_path(const RunConfig& config, ModelKind kind, const StationSeries& s) {
    return config.out_dir / "models" / (std::string(to_string(kind)) + "_" + series_name(s.station_id, s.lead_time_h) +
                                        ".json");
}

struct PredictionKey {
    std::string model;
    std::string station;
    int lead;
    auto operator<=>(const PredictionKey&) const = default;
};

using PredictionMap = std::map<PredictionKey, std::map<Date, GaussianParams>>;

PredictionMap read_predictions(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IOError, "cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "date,station_id,lead_time_h,model,mu,sigma") {
        throw Error(ErrorCode::ParseError, path.string() + ": unexpected header");
    }
    PredictionMap out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        if (f.size() != 6) throw Error(ErrorCode::ParseError, "predictions row " + std::to_string(row) + ": 6 fields expected");
        try {
            const GaussianParams g{std::stod(f[4]), std::stod(f[5])};
            if (!g.valid()) throw std::invalid_argument("sigma");
            out[{f[3], f[1], std::stoi(f[2])}][parse_date(f[0])] = g;
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, "predictions row " + std::to_string(row) + ": invalid value");
        }
    }
    return out;
}

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidConfig: return 2;
        case ErrorCode::NumericalFailure:
        case ErrorCode::InvalidStart:
        case ErrorCode::DegenerateDifferential: return 4;
        default: return 3;
    }
}

}  // namespace

void validate(const RunConfig& config) {
    if (config.models.empty()) throw Error(ErrorCode::InvalidConfig, "no model selected");
    if (config.train_start > config.train_end) throw Error(ErrorCode::InvalidConfig, "training range is reversed");
    if (config.valid_start > config.valid_end) throw Error(ErrorCode::InvalidConfig, "validation range is reversed");
    if (config.valid_start <= config.train_end) {
        throw Error(ErrorCode::InvalidConfig, "validation must start after the training period");
    }
    if (config.max_iter < 1) throw Error(ErrorCode::InvalidConfig, "max-iter must be positive");
    if (config.n_stations < 1 || config.n_days < 1 || config.members < 2) {
        throw Error(ErrorCode::InvalidConfig, "simulation sizes must be positive with at least 2 members");
    }
    if (config.pit_bins < 2) throw Error(ErrorCode::InvalidConfig, "pit-bins must be at least 2");
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw Error(ErrorCode::InvalidConfig, "alpha must lie in (0, 1)");
    for (int lead : config.leads) {
        if (lead < 1) throw Error(ErrorCode::InvalidConfig, "lead times must be positive");
    }
    for (int lag : config.lb_lags) {
        if (lag < 1) throw Error(ErrorCode::InvalidConfig, "Ljung-Box lags must be positive");
    }
}

FitOptions fit_options(const RunConfig& config) {
    FitOptions o;
    o.optimizer.max_iterations = config.max_iter;
    o.analytic_gradient = config.analytic_gradient;
    return o;
}

std::uint64_t series_seed(std::uint64_t seed, int station, int lead_time_h) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(station), static_cast<std::uint32_t>(lead_time_h)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

void cmd_simulate(const RunConfig& config) {
    validate(config);
    ensure_dir(config.out_dir);
    const std::vector<int> leads = config.leads.empty() ? std::vector<int>{24} : config.leads;
    for (int s = 1; s <= config.n_stations; ++s) {
        char id[32];
        std::snprintf(id, sizeof id, "ST%02d", s);
        for (int lead : leads) {
            SyntheticConfig cfg = scenario_config(config.scenario);
            cfg.station_id = id;
            cfg.lead_time_h = lead;
            cfg.start = config.sim_start;
            cfg.n_days = config.n_days;
            cfg.members = config.members;
            cfg.seed = series_seed(config.seed, s, lead);
            const SyntheticStation station = generate_synthetic(cfg);
            const std::string name = series_name(cfg.station_id, lead);
            write_station_csv(config.out_dir / (name + ".csv"), std::span(&station.series, 1));
            write_truth_csv(config.out_dir / ("truth_" + name + ".csv"), station);
        }
    }
}

void cmd_fit(const RunConfig& config) {
    validate(config);
    const std::vector<StationSeries> data = load_data(config);
    ensure_dir(config.out_dir / "models");
    const FitOptions options = fit_options(config);
    for (const StationSeries& series : data) {
        const StationSeries train = covered_range(series, config.train_start, config.train_end, "training range");
        for (ModelKind kind : config.models) {
            const FittedModel model = fit_model(kind, train, options);
            save_model(model_path(config, kind, series), model);
        }
    }
}

void cmd_predict(const RunConfig& config) {
    validate(config);
    const std::vector<StationSeries> data = load_data(config);
    const FitOptions options = fit_options(config);
    ensure_dir(config.out_dir);
    std::ostringstream out;
    out << "date,station_id,lead_time_h,model,mu,sigma\n";
    for (const StationSeries& series : data) {
        const StationSeries full = covered_range(series, config.train_start, config.valid_end, "prediction range");
        const auto begin = full.index_of(config.valid_start);
        if (!begin) throw Error(ErrorCode::InvalidInput, "validation start missing for " + series.station_id);
        for (ModelKind kind : config.models) {
            const FittedModel model = load_model(model_path(config, kind, series));
            if (model.kind != kind || model.meta.station_id != series.station_id ||
                model.meta.lead_time_h != series.lead_time_h) {
                throw Error(ErrorCode::InvalidInput, "model file does not match " +
                                                         series_name(series.station_id, series.lead_time_h));
            }
            const std::vector<GaussianParams> pred = predict(model, full, *begin, full.size(), options);
            for (std::size_t i = 0; i < pred.size(); ++i) {
                out << format_date(full.dates[*begin + i]) << ',' << series.station_id << ',' << series.lead_time_h
                    << ',' << to_string(kind) << ',' << fmt6(pred[i].mu) << ',' << fmt6(pred[i].sigma) << '\n';
            }
        }
    }
    std::ofstream file(config.out_dir / "predictions.csv");
    if (!file) throw Error(ErrorCode::IOError, "cannot write predictions.csv");
    file << out.str();
}

void cmd_verify(const RunConfig& config) {
    validate(config);
    const std::vector<StationSeries> data = load_data(config);
    const PredictionMap predictions = read_predictions(config.out_dir / "predictions.csv");

    ScoreTable table;
    std::map<std::string, std::vector<double>> pit;
    std::vector<std::string> method_order;
    for (ModelKind kind : config.models) method_order.emplace_back(to_string(kind));
    method_order.emplace_back("RAW");

    for (std::size_t si = 0; si < data.size(); ++si) {
        const StationSeries& series = data[si];
        const auto first = series.index_of(config.valid_start);
        const auto last = series.index_of(config.valid_end);
        if (!first || !last) {
            throw Error(ErrorCode::AlignmentError,
                        "validation range not covered for " + series_name(series.station_id, series.lead_time_h));
        }
        const double level = ensemble_nominal_level(series.member_count());
        std::mt19937_64 rng(series_seed(config.seed, static_cast<int>(si) + 1, series.lead_time_h));
        for (const std::string& method : method_order) {
            const std::map<Date, GaussianParams>* preds = nullptr;
            if (method != "RAW") {
                const auto it = predictions.find({method, series.station_id, series.lead_time_h});
                if (it == predictions.end()) {
                    throw Error(ErrorCode::AlignmentError, "no predictions of " + method + " for " +
                                                               series_name(series.station_id, series.lead_time_h));
                }
                preds = &it->second;
            }
            std::vector<Date> dates;
            ScoreSample cases;
            for (std::size_t i = *first; i <= *last; ++i) {
                const double y = series.obs[static_cast<Eigen::Index>(i)];
                if (is_missing(y)) continue;
                const Date d = series.dates[i];
                if (preds) {
                    const auto p = preds->find(d);
                    if (p == preds->end()) {
                        throw Error(ErrorCode::AlignmentError, method + " has no prediction for " + format_date(d) +
                                                                   " at " + series.station_id);
                    }
                    cases.push_back(score_gaussian(p->second, y, level));
                } else {
                    cases.push_back(score_ensemble(series.members.row(static_cast<Eigen::Index>(i)).transpose(), y, rng));
                }
                dates.push_back(d);
                pit[method].push_back(cases.back().pit);
            }
            table.add(method, series.station_id, series.lead_time_h, std::move(dates), std::move(cases));
        }
    }

    ensure_dir(config.out_dir);
    write_score_table_csv(config.out_dir / "scores.csv", table);

    {
        std::ofstream out(config.out_dir / "summary.csv");
        if (!out) throw Error(ErrorCode::IOError, "cannot write summary.csv");
        const double raw_crps = table.method_summary("RAW").crps;
        out << "method,n,crps,crpss,logs,rmse,width,coverage\n";
        for (const std::string& m : method_order) {
            const ScoreSummary s = table.method_summary(m);
            out << m << ',' << s.n << ',' << fmt6(s.crps) << ',' << fmt6(crpss(s.crps, raw_crps)) << ','
                << (std::isnan(s.logs) ? std::string("NA") : fmt6(s.logs)) << ',' << fmt6(s.rmse) << ','
                << fmt6(s.width) << ',' << fmt6(s.coverage) << '\n';
        }
    }

    write_significance_csv(config.out_dir / "significance.csv", significance_matrix(table, config.alpha));

    std::vector<PitSummary> pits;
    for (const std::string& m : method_order) pits.push_back({m, pit_histogram(pit[m], config.pit_bins)});
    write_pit_csv(config.out_dir / "pit.csv", pits);

    std::vector<ResidualSet> residuals;
    for (ModelKind kind : config.models) {
        if (!is_seasonal(kind)) continue;
        ResidualSet set{std::string(to_string(kind)), {}};
        for (const StationSeries& series : data) {
            const FittedModel model = load_model(model_path(config, kind, series));
            const StationSeries train = covered_range(series, model.meta.train_start, model.meta.train_end,
                                                      "training range");
            set.stations.push_back(training_residuals(model, train));
        }
        residuals.push_back(std::move(set));
    }
    write_residual_dependence_csv(config.out_dir / "residual_dependence.csv",
                                  residual_dependence_table(residuals, config.lb_lags, config.alpha));
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Seasonal and autoregressive EMOS postprocessing of ensemble temperature forecasts", "tsemos"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "flat key=value file; command-line flags take precedence");

    std::string data_dir = "data", out_dir = "out", models, leads, stations, lb_lags = "1,5,10";
    std::string train_start = "2015-01-01", train_end = "2019-12-31", valid_start = "2020-01-01",
                valid_end = "2020-12-31", sim_start = "2015-01-01", scenario = "sar";
    RunConfig config;
    app.add_option("--data", data_dir, "input directory with station CSV files");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--models", models, "comma-separated model names (default: all)");
    app.add_option("--lead", leads, "comma-separated lead times in hours");
    app.add_option("--stations", stations, "comma-separated station ids");
    app.add_option("--train-start", train_start);
    app.add_option("--train-end", train_end);
    app.add_option("--valid-start", valid_start);
    app.add_option("--valid-end", valid_end);
    app.add_option("--seed", config.seed);
    app.add_option("--max-iter", config.max_iter);
    app.add_flag("--analytic-gradient", config.analytic_gradient, "use closed-form objective gradients");
    app.add_option("--stations-count", config.n_stations, "simulate: number of stations");
    app.add_option("--days", config.n_days, "simulate: days per series");
    app.add_option("--members", config.members, "simulate: ensemble size");
    app.add_option("--start", sim_start, "simulate: first date");
    app.add_option("--scenario", scenario, "simulate: sar, dar or garch");
    app.add_option("--pit-bins", config.pit_bins);
    app.add_option("--alpha", config.alpha);
    app.add_option("--lb-lags", lb_lags, "verify: Ljung-Box lags");
    app.add_flag("--quiet", [](std::int64_t) { log::set_quiet(true); }, "suppress warnings");

    auto* simulate = app.add_subcommand("simulate", "write synthetic station data");
    auto* fit = app.add_subcommand("fit", "fit models on the training period");
    auto* predict_cmd = app.add_subcommand("predict", "predict the validation period");
    auto* verify = app.add_subcommand("verify", "score predictions and compare methods");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "ERROR InvalidConfig: " << e.what() << '\n';
        return 2;
    }

    try {
        config.data_dir = data_dir;
        config.out_dir = out_dir;
        if (!models.empty()) {
            config.models.clear();
            for (const std::string& m : split_list(models)) config.models.push_back(parse_model_kind(m));
        }
        config.leads = parse_int_list(leads, "lead time");
        config.stations = split_list(stations);
        config.lb_lags = parse_int_list(lb_lags, "lag");
        config.train_start = config_date(train_start, "train-start");
        config.train_end = config_date(train_end, "train-end");
        config.valid_start = config_date(valid_start, "valid-start");
        config.valid_end = config_date(valid_end, "valid-end");
        config.sim_start = config_date(sim_start, "start");
        if (scenario == "sar") config.scenario = SyntheticScenario::Sar;
        else if (scenario == "dar") config.scenario = SyntheticScenario::Dar;
        else if (scenario == "garch") config.scenario = SyntheticScenario::Garch;
        else throw Error(ErrorCode::InvalidConfig, "unknown scenario '" + scenario + "'");

        log::reset_warning_count();
        if (simulate->parsed()) cmd_simulate(config);
        else if (fit->parsed()) cmd_fit(config);
        else if (predict_cmd->parsed()) cmd_predict(config);
        else if (verify->parsed()) cmd_verify(config);
        if (log::warning_count() > 0) std::cerr << "warnings: " << log::warning_count() << '\n';
        return 0;
    } catch (const Error& e) {
        std::cerr << "ERROR " << to_string(e.code()) << ": " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "ERROR IOError: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace tsemos
