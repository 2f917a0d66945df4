#include "tsemos/model_io.hpp"

#include "tsemos/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace tsemos {

namespace {

using nlohmann::ordered_json;

ordered_json vector_json(const Eigen::VectorXd& v) {
    ordered_json arr = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Eigen::VectorXd json_vector(const ordered_json& arr) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr.at(i).get<double>();
    return v;
}

ordered_json ar_json(const ARCoeffs& ar) {
    return {{"p", ar.order()}, {"eta", ar.eta}, {"tau", vector_json(ar.tau)}, {"sigma2", ar.innovation_variance}};
}

ARCoeffs json_ar(const ordered_json& j) {
    ARCoeffs ar;
    ar.eta = j.at("eta").get<double>();
    ar.tau = json_vector(j.at("tau"));
    ar.innovation_variance = j.value("sigma2", 0.0);
    if (j.at("p").get<int>() != ar.order()) throw Error(ErrorCode::ParseError, "AR order does not match tau");
    return ar;
}

}  // namespace

std::string model_to_json(const FittedModel& model) {
    ordered_json j;
    j["kind"] = std::string(to_string(model.kind));
    j["loc"] = vector_json(model.loc);
    j["scale"] = vector_json(model.scale);
    if (model.kind == ModelKind::ArEmos) {
        ordered_json members = ordered_json::array();
        for (const ARCoeffs& ar : model.member_ar) members.push_back(ar_json(ar));
        j["ar"] = members;
    } else if (model.ar) {
        j["ar"] = ar_json(*model.ar);
    } else {
        j["ar"] = nullptr;
    }
    if (model.garch) {
        j["garch"] = {{"omega0", model.garch->omega0}, {"omega1", model.garch->omega1}, {"omega2", model.garch->omega2}};
    } else {
        j["garch"] = nullptr;
    }
    j["weight"] = model.weight ? ordered_json(*model.weight) : ordered_json(nullptr);
    const TrainingMeta& m = model.meta;
    j["meta"] = {{"station_id", m.station_id},
                 {"lead_time_h", m.lead_time_h},
                 {"train_start", format_date(m.train_start)},
                 {"train_end", format_date(m.train_end)},
                 {"n_train", m.n_train},
                 {"converged", m.converged},
                 {"status", m.status},
                 {"iterations", m.iterations},
                 {"initial_crps", m.initial_crps},
                 {"train_crps", m.train_crps}};
    return j.dump(2) + "\n";
}

FittedModel model_from_json(const std::string& text) {
    try {
        const ordered_json j = ordered_json::parse(text);
        FittedModel model;
        try {
            model.kind = parse_model_kind(j.at("kind").get<std::string>());
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, e.what());
        }
        model.loc = json_vector(j.at("loc"));
        model.scale = json_vector(j.at("scale"));
        const ordered_json& ar = j.at("ar");
        if (model.kind == ModelKind::ArEmos) {
            for (const auto& member : ar) model.member_ar.push_back(json_ar(member));
        } else if (!ar.is_null()) {
            model.ar = json_ar(ar);
        }
        if (const ordered_json& g = j.at("garch"); !g.is_null()) {
            model.garch = GARCHCoeffs{g.at("omega0").get<double>(), g.at("omega1").get<double>(),
                                      g.at("omega2").get<double>()};
        }
        if (const ordered_json& w = j.at("weight"); !w.is_null()) model.weight = w.get<double>();
        const ordered_json& m = j.at("meta");
        model.meta.station_id = m.at("station_id").get<std::string>();
        model.meta.lead_time_h = m.at("lead_time_h").get<int>();
        model.meta.train_start = parse_date(m.at("train_start").get<std::string>());
        model.meta.train_end = parse_date(m.at("train_end").get<std::string>());
        model.meta.n_train = m.at("n_train").get<std::size_t>();
        model.meta.converged = m.at("converged").get<bool>();
        model.meta.status = m.at("status").get<std::string>();
        model.meta.iterations = m.at("iterations").get<int>();
        model.meta.initial_crps = m.at("initial_crps").get<double>();
        model.meta.train_crps = m.at("train_crps").get<double>();
        try {
            validate(model);
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, std::string("invalid model: ") + e.what());
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed model JSON: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const FittedModel& model) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IOError, "cannot write " + path.string());
    out << model_to_json(model);
    if (!out) throw Error(ErrorCode::IOError, "write failed for " + path.string());
}

FittedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IOError, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

}  // namespace tsemos
