#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <sstream>

#include "stacksl/confidence.hpp"
#include "stacksl/config.hpp"
#include "stacksl/errors.hpp"
#include "stacksl/harness.hpp"
#include "stacksl/io.hpp"
#include "stacksl/linalg.hpp"
#include "stacksl/model.hpp"

namespace py = pybind11;
using namespace stacksl;

namespace {

Params as_params(const Vector& theta) { return {theta, 1.0}; }

CandidateSet as_set(const Matrix& features) {
    CandidateSet cs;
    cs.features = features;
    return cs;
}

py::object opt(const std::optional<double>& v) {
    return v ? py::object(py::float_(*v)) : py::object(py::none());
}

py::dict row_dict(const SummaryRow& r) {
    py::dict d;
    d["learner"] = r.learner;
    d["beta"] = r.beta;
    d["c"] = r.c;
    d["lambda_kl"] = r.lambda_kl;
    d["mode"] = r.mode;
    d["seed"] = r.seed;
    d["regret_per_T"] = r.regret_per_T;
    d["queries_per_T"] = r.queries_per_T;
    d["mean_raw_loss"] = opt(r.mean_raw_loss);
    d["max_raw_loss"] = opt(r.max_raw_loss);
    d["mean_clipped_loss"] = opt(r.mean_clipped_loss);
    d["max_clipped_loss"] = opt(r.max_clipped_loss);
    d["wall_time_ms"] = r.wall_time_ms;
    return d;
}

template <typename T, typename F>
py::array_t<T> column(const Trace& tr, F&& get) {
    py::array_t<T> a(static_cast<py::ssize_t>(tr.size()));
    auto m = a.template mutable_unchecked<1>();
    for (std::size_t i = 0; i < tr.size(); ++i) m(static_cast<py::ssize_t>(i)) = get(tr[i]);
    return a;
}

py::dict trace_dict(const Trace& tr) {
    const double nan = std::nan("");
    py::dict d;
    d["t"] = column<std::uint64_t>(tr, [](const RoundRecord& r) { return r.t; });
    d["chosen"] = column<std::int64_t>(tr, [](const RoundRecord& r) { return static_cast<std::int64_t>(r.chosen); });
    d["optimal"] = column<std::int64_t>(tr, [](const RoundRecord& r) { return static_cast<std::int64_t>(r.optimal); });
    d["queried"] = column<bool>(tr, [](const RoundRecord& r) { return r.queried; });
    d["q"] = column<std::uint64_t>(tr, [](const RoundRecord& r) { return r.queries; });
    d["delta"] = column<double>(tr, [](const RoundRecord& r) { return r.width; });
    d["epsilon"] = column<double>(tr, [](const RoundRecord& r) { return r.threshold; });
    d["raw_loss"] = column<double>(tr, [&](const RoundRecord& r) { return r.raw_loss.value_or(nan); });
    d["clipped_loss"] = column<double>(tr, [&](const RoundRecord& r) { return r.clipped_loss.value_or(nan); });
    d["inst_regret"] = column<double>(tr, [](const RoundRecord& r) { return r.inst_regret; });
    d["potential"] = column<double>(tr, [](const RoundRecord& r) { return r.chosen_norm_sq; });
    return d;
}

ExperimentConfig make_config(const py::dict& kv) {
    ExperimentConfig cfg;
    for (const auto& [k, v] : kv) {
        std::string value;
        if (py::isinstance<py::bool_>(v)) value = v.cast<bool>() ? "true" : "false";
        else if (py::isinstance<py::float_>(v)) value = format_double(v.cast<double>());
        else value = py::str(v).cast<std::string>();
        apply_config_value(cfg, k.cast<std::string>(), value);
    }
    cfg.validate();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Budget-aware Stackelberg supervised learning: core operations";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);

    py::class_<GramState>(m, "GramState")
        .def(py::init<std::size_t, double, std::size_t>(), py::arg("d"), py::arg("lam") = 1.0,
             py::arg("refactor_interval") = kDefaultRefactorInterval)
        .def("update", &GramState::update, py::arg("phi"))
        .def("add_observation", &GramState::add_observation, py::arg("phi"), py::arg("y"))
        .def("mahalanobis_norm", &GramState::mahalanobis_norm, py::arg("phi"))
        .def("ridge_estimate", &GramState::ridge_estimate)
        .def("refactor", &GramState::refactor)
        .def("inverse_residual", &GramState::inverse_residual)
        .def_property_readonly("dim", &GramState::dim)
        .def_property_readonly("rounds", &GramState::rounds)
        .def_property_readonly("gram", &GramState::gram)
        .def_property_readonly("gram_inverse", &GramState::gram_inverse)
        .def_property_readonly("response", &GramState::response);

    m.def("score", [](const Vector& theta, const Vector& phi) { return score(as_params(theta), phi); });
    m.def("softmax", &softmax, py::arg("logits"));
    m.def("softmax_policy", [](const Vector& theta, const Matrix& features) {
        return softmax_policy(as_params(theta), as_set(features));
    });
    m.def("ce_loss", [](const Vector& theta, const Matrix& features, std::size_t star) {
        return ce_loss(as_params(theta), as_set(features), star);
    }, py::arg("theta"), py::arg("features"), py::arg("star"));
    m.def("clip_loss", &clip_loss, py::arg("loss"), py::arg("rho"));
    m.def("kl_divergence", [](const Vector& theta, const Vector& ref, const Matrix& features) {
        return kl_divergence(as_params(theta), as_params(ref), as_set(features));
    });
    m.def("loss_gradient",
          [](const Vector& theta, const Vector& ref, const Matrix& features, std::size_t star,
             double lambda_kl, double rho) {
              return loss_gradient(as_params(theta), as_params(ref), as_set(features), star, lambda_kl, rho);
          },
          py::arg("theta"), py::arg("ref"), py::arg("features"), py::arg("star"),
          py::arg("lambda_kl") = 0.7, py::arg("rho") = 5.0);

    m.def("radius",
          [](std::uint64_t t, std::size_t d, double sigma, double delta, double lam, double S, double L) {
              ConfidenceConfig cc;
              cc.sigma = sigma;
              cc.delta = delta;
              cc.lambda_ridge = lam;
              cc.norm_bound = S;
              cc.feature_bound = L;
              cc.validate();
              return radius(cc, t, d);
          },
          py::arg("t"), py::arg("d"), py::arg("sigma") = 0.1, py::arg("delta") = 0.05,
          py::arg("lam") = 1.0, py::arg("S") = 1.0, py::arg("L") = 1.0);
    m.def("llf_threshold", &llf_threshold, py::arg("c"), py::arg("q"));
    m.def("gate", [](double width, double threshold, std::uint64_t q, std::uint64_t budget) {
        return gate(width, threshold, q, budget).query();
    }, py::arg("width"), py::arg("threshold"), py::arg("q"), py::arg("budget"));

    py::class_<ExperimentConfig>(m, "Config")
        // Dotted keys go through unpacking: Config(**{"learner.kind": "llf"}).
        .def(py::init([](const py::kwargs& kw) { return make_config(kw); }))
        .def_static("from_dict", &make_config)
        .def_static("from_text", [](const std::string& text) { return config_from_grid(parse_config_text(text)); })
        .def("set", [](ExperimentConfig& c, const std::string& key, const std::string& value) {
            apply_config_value(c, key, value);
            c.validate();
        })
        .def_property_readonly("horizon", [](const ExperimentConfig& c) { return c.horizon; })
        .def_property_readonly("dim", [](const ExperimentConfig& c) { return c.dim; })
        .def_property_readonly("budget", &ExperimentConfig::budget)
        .def_property_readonly("seeds", &ExperimentConfig::seeds)
        .def_property_readonly("learner", [](const ExperimentConfig& c) { return std::string(to_string(c.learner)); })
        .def_property_readonly("mode", [](const ExperimentConfig& c) { return std::string(to_string(c.mode)); });

    m.def("config_keys", [] {
        py::dict d;
        for (const auto& k : config_keys()) d[py::str(k.name)] = k.default_value;
        return d;
    });
    m.def("expand_grid", [](const std::string& text) { return expand_grid(parse_config_text(text)); });

    m.def("run_episode", [](const ExperimentConfig& cfg, std::uint64_t seed) {
        Trace tr;
        {
            py::gil_scoped_release release;
            tr = run_episode(cfg, seed);
        }
        return trace_dict(tr);
    }, py::arg("config"), py::arg("seed"));

    m.def("sweep", [](const std::vector<ExperimentConfig>& grid, std::size_t workers) {
        SweepResult res;
        {
            py::gil_scoped_release release;
            res = sweep(grid, {workers, false});
        }
        py::list rows;
        for (const auto& r : res.runs) rows.append(row_dict(r.summary));
        for (const auto& a : res.aggregates) {
            rows.append(row_dict(a.median));
            rows.append(row_dict(a.std_error));
        }
        return rows;
    }, py::arg("grid"), py::arg("workers") = 1);

    m.def("detail_csv", [](const std::vector<ExperimentConfig>& grid, std::size_t workers) {
        std::ostringstream os;
        {
            py::gil_scoped_release release;
            write_detail_csv(os, grid, sweep(grid, {workers, true}));
        }
        return py::bytes(os.str());
    }, py::arg("grid"), py::arg("workers") = 1);

    m.def("clip_study", [](const ExperimentConfig& cfg, std::size_t workers) {
        ClipStudyResult res;
        {
            py::gil_scoped_release release;
            res = clip_study(cfg, workers);
        }
        py::dict d;
        d["with_clip"] = row_dict(res.with_clip);
        d["without_clip"] = row_dict(res.without_clip);
        d["clip_fraction"] = res.clip_fraction;
        return d;
    }, py::arg("config"), py::arg("workers") = 1);

    m.def("calibrate_c", [](const ExperimentConfig& cfg, std::uint64_t target, std::uint64_t warmup, double kappa) {
        const auto r = calibrate_c(cfg, target, warmup, kappa);
        py::dict d;
        d["c"] = r.c;
        d["target"] = r.target;
        d["realized_queries"] = r.realized_queries;
        d["converged"] = r.converged;
        d["evaluations"] = r.evaluations;
        return d;
    }, py::arg("config"), py::arg("target"), py::arg("warmup") = 500, py::arg("kappa") = 1.0);

    m.def("validate", [](const ExperimentConfig& cfg, std::size_t coverage_seeds, std::uint64_t coverage_horizon) {
        ValidateOptions vo;
        vo.coverage_seeds = coverage_seeds;
        vo.coverage_horizon = coverage_horizon;
        InvariantReport rep;
        {
            py::gil_scoped_release release;
            rep = validate_invariants(cfg, vo);
        }
        py::dict d;
        for (const auto& c : rep.checks) d[py::str(c.name)] = py::make_tuple(c.passed, c.measured, c.limit);
        return d;
    }, py::arg("config"), py::arg("coverage_seeds") = 20, py::arg("coverage_horizon") = 5000);

    m.def("gradient_check", &gradient_check, py::arg("seed"), py::arg("instances") = 100,
          py::arg("step") = 1e-5);
}
