#include "qse/config.hpp"

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "qse/errors.hpp"
#include "qse/presets.hpp"

namespace qse {

using json = nlohmann::json;

namespace {

bool exact_equal(const CMatrix& a, const CMatrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a.cwiseEqual(b).all();
}

bool exact_equal(const std::optional<CMatrix>& a, const std::optional<CMatrix>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || exact_equal(*a, *b);
}

bool exact_equal(const std::optional<CVector>& a, const std::optional<CVector>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || (a->size() == b->size() && a->cwiseEqual(*b).all());
}

[[noreturn]] void fail(const std::string& field, const std::string& why) {
    throw ValidationError(field + ": " + why);
}

const json& member(const json& obj, const std::string& field, const char* key) {
    if (!obj.is_object()) fail(field, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(field + "." + key, "missing");
    return *it;
}

const json* member_opt(const json& obj, const char* key) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

void reject_unknown_keys(const json& obj, const std::string& field,
                         std::initializer_list<const char*> known) {
    if (!obj.is_object()) fail(field, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) fail(field + "." + key, "unknown field");
    }
}

double as_number(const json& j, const std::string& field) {
    if (!j.is_number()) fail(field, "expected a number");
    return j.get<double>();
}

long as_integer(const json& j, const std::string& field) {
    if (!j.is_number_integer()) fail(field, "expected an integer");
    return j.get<long>();
}

bool as_bool(const json& j, const std::string& field) {
    if (!j.is_boolean()) fail(field, "expected a boolean");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& field) {
    if (!j.is_string()) fail(field, "expected a string");
    return j.get<std::string>();
}

Complex as_complex(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        fail(field, "expected a [re, im] pair");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

CVector as_cvector(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) fail(field, "expected a non-empty array of [re, im] pairs");
    CVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k)
        v(static_cast<Eigen::Index>(k)) = as_complex(j[k], field + "[" + std::to_string(k) + "]");
    return v;
}

CMatrix as_cmatrix(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) fail(field, "expected a non-empty array of rows");
    const std::size_t rows = j.size();
    std::size_t cols = 0;
    CMatrix m;
    for (std::size_t i = 0; i < rows; ++i) {
        const json& row = j[i];
        const std::string row_field = field + "[" + std::to_string(i) + "]";
        if (!row.is_array() || row.empty()) fail(row_field, "expected a non-empty row array");
        if (i == 0) {
            cols = row.size();
            m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        } else if (row.size() != cols) {
            fail(row_field, "ragged row: expected " + std::to_string(cols) + " entries");
        }
        for (std::size_t k = 0; k < cols; ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                as_complex(row[k], row_field + "[" + std::to_string(k) + "]");
    }
    return m;
}

json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

json cvector_to_json(const CVector& v) {
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(complex_to_json(v(k)));
    return out;
}

json cmatrix_to_json(const CMatrix& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_to_json(m(i, k)));
        out.push_back(row);
    }
    return out;
}

NormKind norm_kind_from(const std::string& s, const std::string& field) {
    if (s == "spectral") return NormKind::spectral;
    if (s == "frobenius") return NormKind::frobenius;
    if (s == "state_dependent") return NormKind::state_dependent;
    fail(field, "expected one of spectral|frobenius|state_dependent, got '" + s + "'");
}

MeasurementMode mode_from(const std::string& s, const std::string& field) {
    if (s == "stacked") return MeasurementMode::stacked;
    if (s == "battery") return MeasurementMode::battery;
    fail(field, "expected one of stacked|battery, got '" + s + "'");
}

EstimatorMode estimator_mode_from(const std::string& s, const std::string& field) {
    if (s == "noiseless_rls") return EstimatorMode::noiseless_rls;
    if (s == "noisy_kalman") return EstimatorMode::noisy_kalman;
    fail(field, "expected one of noiseless_rls|noisy_kalman, got '" + s + "'");
}

ProcessNoiseMode process_noise_mode_from(const std::string& s, const std::string& field) {
    if (s == "explicit") return ProcessNoiseMode::explicit_q;
    if (s == "output_folded") return ProcessNoiseMode::output_folded;
    fail(field, "expected one of explicit|output_folded, got '" + s + "'");
}

OperatorRef parse_operator_ref(const json& obj, const std::string& field,
                               const char* matrix_key) {
    OperatorRef ref;
    int forms = 0;
    if (const json* p = member_opt(obj, "preset")) {
        ref.preset = as_string(*p, field + ".preset");
        if (!is_preset_name(*ref.preset))
            fail(field + ".preset", "unknown preset '" + *ref.preset + "'");
        ++forms;
    }
    if (const json* p = member_opt(obj, "kron")) {
        if (!p->is_array() || p->empty()) fail(field + ".kron", "expected a non-empty array");
        std::vector<std::string> names;
        for (std::size_t k = 0; k < p->size(); ++k) {
            names.push_back(as_string((*p)[k], field + ".kron[" + std::to_string(k) + "]"));
            if (!is_preset_name(names.back()))
                fail(field + ".kron[" + std::to_string(k) + "]",
                     "unknown preset '" + names.back() + "'");
        }
        ref.kron = std::move(names);
        ++forms;
    }
    if (const json* p = member_opt(obj, matrix_key)) {
        ref.matrix = as_cmatrix(*p, field + "." + matrix_key);
        ++forms;
    }
    if (forms != 1)
        fail(field, std::string("expected exactly one of preset|kron|") + matrix_key);
    return ref;
}

// Normalization rule for states given in configs: accept |‖ψ‖ − 1| ≤ 1e−8
// and snap to exact unit norm so downstream tolerance checks hold.
CVector snap_normalized(CVector v, const std::string& field) {
    const double n = v.norm();
    if (std::abs(n - 1.0) > 1e-8)
        fail(field, "state norm is " + std::to_string(n) + ", expected 1 within 1e-8");
    return v / n;
}

}  // namespace

bool OperatorRef::operator==(const OperatorRef& other) const {
    return preset == other.preset && kron == other.kron && exact_equal(matrix, other.matrix);
}

bool DynamicsConfig::operator==(const DynamicsConfig& other) const {
    return unitary_ref == other.unitary_ref && exact_equal(hamiltonian, other.hamiltonian) &&
           dt == other.dt && hbar == other.hbar;
}

bool MeasurementConfig::operator==(const MeasurementConfig& other) const {
    return operators == other.operators && norm_kind == other.norm_kind &&
           mode == other.mode && exact_equal(reference_state, other.reference_state);
}

bool NoiseConfig::operator==(const NoiseConfig& other) const {
    return sigma_q == other.sigma_q && exact_equal(q, other.q) && sigma_r == other.sigma_r &&
           exact_equal(r, other.r) && process_noise_mode == other.process_noise_mode;
}

bool SystemConfig::operator==(const SystemConfig& other) const {
    return dim == other.dim && dynamics == other.dynamics &&
           measurement == other.measurement && noise == other.noise &&
           initial_state.size() == other.initial_state.size() &&
           initial_state.cwiseEqual(other.initial_state).all() &&
           renormalize_after_state_noise == other.renormalize_after_state_noise;
}

const char* to_string(NormKind kind) {
    switch (kind) {
        case NormKind::spectral: return "spectral";
        case NormKind::frobenius: return "frobenius";
        case NormKind::state_dependent: return "state_dependent";
    }
    return "?";
}

const char* to_string(MeasurementMode mode) {
    return mode == MeasurementMode::stacked ? "stacked" : "battery";
}

const char* to_string(EstimatorMode mode) {
    return mode == EstimatorMode::noiseless_rls ? "noiseless_rls" : "noisy_kalman";
}

const char* to_string(ProcessNoiseMode mode) {
    return mode == ProcessNoiseMode::explicit_q ? "explicit" : "output_folded";
}

CMatrix resolve_operator(const OperatorRef& ref, const std::string& field) {
    if (ref.preset) return preset_operator(*ref.preset);
    if (ref.kron) return kron_chain(*ref.kron);
    if (ref.matrix) return *ref.matrix;
    fail(field, "empty operator reference");
}

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(e.what());
    }
    if (!root.is_object()) throw ParseError("top level must be an object");

    reject_unknown_keys(root, "config", {"schema_version", "system", "estimator", "run"});

    ExperimentConfig cfg;
    cfg.schema_version =
        static_cast<int>(as_integer(member(root, "config", "schema_version"), "schema_version"));
    if (cfg.schema_version != kConfigSchemaVersion)
        fail("schema_version", "expected " + std::to_string(kConfigSchemaVersion) + ", got " +
                                   std::to_string(cfg.schema_version));

    // --- system ---------------------------------------------------------
    const json& sys = member(root, "config", "system");
    reject_unknown_keys(sys, "system",
                        {"dim", "dynamics", "measurement", "noise", "initial_state",
                         "renormalize_after_state_noise"});
    cfg.system.dim = as_integer(member(sys, "system", "dim"), "system.dim");
    if (cfg.system.dim < 1) fail("system.dim", "must be ≥ 1");

    const json& dyn = member(sys, "system", "dynamics");
    reject_unknown_keys(dyn, "system.dynamics",
                        {"preset", "kron", "unitary", "hamiltonian", "dt", "hbar"});
    if (member_opt(dyn, "hamiltonian")) {
        cfg.system.dynamics.hamiltonian =
            as_cmatrix(member(dyn, "system.dynamics", "hamiltonian"),
                       "system.dynamics.hamiltonian");
        cfg.system.dynamics.dt =
            as_number(member(dyn, "system.dynamics", "dt"), "system.dynamics.dt");
        if (cfg.system.dynamics.dt <= 0.0) fail("system.dynamics.dt", "must be > 0");
        if (const json* p = member_opt(dyn, "hbar")) {
            cfg.system.dynamics.hbar = as_number(*p, "system.dynamics.hbar");
            if (cfg.system.dynamics.hbar <= 0.0) fail("system.dynamics.hbar", "must be > 0");
        }
        if (member_opt(dyn, "preset") || member_opt(dyn, "kron") || member_opt(dyn, "unitary"))
            fail("system.dynamics", "hamiltonian form excludes preset|kron|unitary");
    } else {
        cfg.system.dynamics.unitary_ref = parse_operator_ref(dyn, "system.dynamics", "unitary");
        if (member_opt(dyn, "dt") || member_opt(dyn, "hbar"))
            fail("system.dynamics", "dt/hbar apply to the hamiltonian form only");
    }

    const json& meas = member(sys, "system", "measurement");
    reject_unknown_keys(meas, "system.measurement",
                        {"operators", "norm_kind", "mode", "reference_state"});
    const json& ops = member(meas, "system.measurement", "operators");
    if (!ops.is_array() || ops.empty())
        fail("system.measurement.operators", "expected a non-empty array");
    std::set<std::string> seen_labels;
    for (std::size_t k = 0; k < ops.size(); ++k) {
        const std::string field = "system.measurement.operators[" + std::to_string(k) + "]";
        reject_unknown_keys(ops[k], field, {"label", "preset", "kron", "matrix"});
        OperatorEntryConfig entry;
        entry.label = as_string(member(ops[k], field, "label"), field + ".label");
        if (entry.label.empty()) fail(field + ".label", "must not be empty");
        if (!seen_labels.insert(entry.label).second)
            fail(field + ".label", "duplicate label '" + entry.label + "'");
        entry.ref = parse_operator_ref(ops[k], field, "matrix");
        cfg.system.measurement.operators.push_back(std::move(entry));
    }
    if (const json* p = member_opt(meas, "norm_kind"))
        cfg.system.measurement.norm_kind =
            norm_kind_from(as_string(*p, "system.measurement.norm_kind"),
                           "system.measurement.norm_kind");
    if (const json* p = member_opt(meas, "mode"))
        cfg.system.measurement.mode =
            mode_from(as_string(*p, "system.measurement.mode"), "system.measurement.mode");
    if (const json* p = member_opt(meas, "reference_state"))
        cfg.system.measurement.reference_state =
            as_cvector(*p, "system.measurement.reference_state");
    if (cfg.system.measurement.norm_kind == NormKind::state_dependent &&
        !cfg.system.measurement.reference_state)
        fail("system.measurement.reference_state",
             "required when norm_kind is state_dependent");

    if (const json* p = member_opt(sys, "noise")) {
        reject_unknown_keys(*p, "system.noise",
                            {"sigma_q", "q", "sigma_r", "r", "process_noise_mode"});
        if (const json* v = member_opt(*p, "sigma_q")) {
            cfg.system.noise.sigma_q = as_number(*v, "system.noise.sigma_q");
            if (*cfg.system.noise.sigma_q < 0.0) fail("system.noise.sigma_q", "must be ≥ 0");
        }
        if (const json* v = member_opt(*p, "q"))
            cfg.system.noise.q = as_cmatrix(*v, "system.noise.q");
        if (cfg.system.noise.sigma_q && cfg.system.noise.q)
            fail("system.noise", "give sigma_q or q, not both");
        if (const json* v = member_opt(*p, "sigma_r")) {
            cfg.system.noise.sigma_r = as_number(*v, "system.noise.sigma_r");
            if (*cfg.system.noise.sigma_r < 0.0) fail("system.noise.sigma_r", "must be ≥ 0");
        }
        if (const json* v = member_opt(*p, "r"))
            cfg.system.noise.r = as_cmatrix(*v, "system.noise.r");
        if (cfg.system.noise.sigma_r && cfg.system.noise.r)
            fail("system.noise", "give sigma_r or r, not both");
        if (const json* v = member_opt(*p, "process_noise_mode"))
            cfg.system.noise.process_noise_mode = process_noise_mode_from(
                as_string(*v, "system.noise.process_noise_mode"),
                "system.noise.process_noise_mode");
    }

    cfg.system.initial_state =
        as_cvector(member(sys, "system", "initial_state"), "system.initial_state");
    if (const json* p = member_opt(sys, "renormalize_after_state_noise"))
        cfg.system.renormalize_after_state_noise =
            as_bool(*p, "system.renormalize_after_state_noise");

    // --- estimator ------------------------------------------------------
    const json& est = member(root, "config", "estimator");
    reject_unknown_keys(est, "estimator", {"lambda", "delta", "mode", "process_noise_mode"});
    cfg.estimator.lambda = as_number(member(est, "estimator", "lambda"), "estimator.lambda");
    if (!(cfg.estimator.lambda > 0.0) || cfg.estimator.lambda > 1.0)
        fail("estimator.lambda", "must be in (0, 1], got " + std::to_string(cfg.estimator.lambda));
    cfg.estimator.delta = as_number(member(est, "estimator", "delta"), "estimator.delta");
    if (!(cfg.estimator.delta > 0.0))
        fail("estimator.delta", "must be > 0, got " + std::to_string(cfg.estimator.delta));
    if (const json* p = member_opt(est, "mode"))
        cfg.estimator.mode = estimator_mode_from(as_string(*p, "estimator.mode"), "estimator.mode");
    if (const json* p = member_opt(est, "process_noise_mode"))
        cfg.estimator.process_noise_mode = process_noise_mode_from(
            as_string(*p, "estimator.process_noise_mode"), "estimator.process_noise_mode");

    // --- run --------------------------------------------------------------
    if (const json* run = member_opt(root, "run")) {
        reject_unknown_keys(*run, "run",
                            {"steps", "n_seeds", "seed_base", "records_csv", "summary",
                             "jobs", "log_states"});
        if (const json* p = member_opt(*run, "steps")) {
            cfg.run.steps = as_integer(*p, "run.steps");
            if (cfg.run.steps < 1) fail("run.steps", "must be ≥ 1");
        }
        if (const json* p = member_opt(*run, "n_seeds")) {
            cfg.run.n_seeds = static_cast<int>(as_integer(*p, "run.n_seeds"));
            if (cfg.run.n_seeds < 1) fail("run.n_seeds", "must be ≥ 1");
        }
        if (const json* p = member_opt(*run, "seed_base")) {
            const long s = as_integer(*p, "run.seed_base");
            if (s < 0) fail("run.seed_base", "must be ≥ 0");
            cfg.run.seed_base = static_cast<std::uint64_t>(s);
        }
        if (const json* p = member_opt(*run, "records_csv"))
            cfg.run.records_csv = as_string(*p, "run.records_csv");
        if (const json* p = member_opt(*run, "summary"))
            cfg.run.summary = as_string(*p, "run.summary");
        if (const json* p = member_opt(*run, "jobs")) {
            cfg.run.jobs = static_cast<int>(as_integer(*p, "run.jobs"));
            if (cfg.run.jobs < 1) fail("run.jobs", "must be ≥ 1");
        }
        if (const json* p = member_opt(*run, "log_states"))
            cfg.run.log_states = as_bool(*p, "run.log_states");
    }

    // Semantic pass: everything must materialize into a valid system.
    build_system_spec(cfg);
    return cfg;
}

namespace {

json operator_ref_to_json(const OperatorRef& ref, const char* matrix_key) {
    json out = json::object();
    if (ref.preset) out["preset"] = *ref.preset;
    if (ref.kron) out["kron"] = *ref.kron;
    if (ref.matrix) out[matrix_key] = cmatrix_to_json(*ref.matrix);
    return out;
}

}  // namespace

std::string serialize_config(const ExperimentConfig& cfg) {
    json root;
    root["schema_version"] = cfg.schema_version;

    json dyn;
    if (cfg.system.dynamics.hamiltonian) {
        dyn["hamiltonian"] = cmatrix_to_json(*cfg.system.dynamics.hamiltonian);
        dyn["dt"] = cfg.system.dynamics.dt;
        dyn["hbar"] = cfg.system.dynamics.hbar;
    } else {
        dyn = operator_ref_to_json(cfg.system.dynamics.unitary_ref, "unitary");
    }

    json ops = json::array();
    for (const auto& entry : cfg.system.measurement.operators) {
        json op = operator_ref_to_json(entry.ref, "matrix");
        op["label"] = entry.label;
        ops.push_back(op);
    }
    json meas;
    meas["operators"] = ops;
    meas["norm_kind"] = to_string(cfg.system.measurement.norm_kind);
    meas["mode"] = to_string(cfg.system.measurement.mode);
    if (cfg.system.measurement.reference_state)
        meas["reference_state"] = cvector_to_json(*cfg.system.measurement.reference_state);

    json noise;
    if (cfg.system.noise.sigma_q) noise["sigma_q"] = *cfg.system.noise.sigma_q;
    if (cfg.system.noise.q) noise["q"] = cmatrix_to_json(*cfg.system.noise.q);
    if (cfg.system.noise.sigma_r) noise["sigma_r"] = *cfg.system.noise.sigma_r;
    if (cfg.system.noise.r) noise["r"] = cmatrix_to_json(*cfg.system.noise.r);
    noise["process_noise_mode"] = to_string(cfg.system.noise.process_noise_mode);

    json sys;
    sys["dim"] = cfg.system.dim;
    sys["dynamics"] = dyn;
    sys["measurement"] = meas;
    sys["noise"] = noise;
    sys["initial_state"] = cvector_to_json(cfg.system.initial_state);
    sys["renormalize_after_state_noise"] = cfg.system.renormalize_after_state_noise;
    root["system"] = sys;

    json est;
    est["lambda"] = cfg.estimator.lambda;
    est["delta"] = cfg.estimator.delta;
    est["mode"] = to_string(cfg.estimator.mode);
    est["process_noise_mode"] = to_string(cfg.estimator.process_noise_mode);
    root["estimator"] = est;

    json run;
    run["steps"] = cfg.run.steps;
    run["n_seeds"] = cfg.run.n_seeds;
    run["seed_base"] = cfg.run.seed_base;
    if (!cfg.run.records_csv.empty()) run["records_csv"] = cfg.run.records_csv;
    if (!cfg.run.summary.empty()) run["summary"] = cfg.run.summary;
    run["jobs"] = cfg.run.jobs;
    run["log_states"] = cfg.run.log_states;
    root["run"] = run;

    return root.dump(2) + "\n";
}

SystemSpec build_system_spec(const ExperimentConfig& cfg) {
    const Eigen::Index d = cfg.system.dim;

    DynamicsSpec dynamics;
    if (cfg.system.dynamics.hamiltonian) {
        const CMatrix& h = *cfg.system.dynamics.hamiltonian;
        if (h.rows() != d || h.cols() != d)
            fail("system.dynamics.hamiltonian",
                 "expected " + std::to_string(d) + "x" + std::to_string(d));
        if (!is_hermitian(h)) fail("system.dynamics.hamiltonian", "must be Hermitian");
        dynamics.hamiltonian = h;
        dynamics.dt = cfg.system.dynamics.dt;
        dynamics.hbar = cfg.system.dynamics.hbar;
    } else {
        CMatrix u = resolve_operator(cfg.system.dynamics.unitary_ref, "system.dynamics");
        if (u.rows() != d || u.cols() != d)
            fail("system.dynamics", "operator is " + std::to_string(u.rows()) + "x" +
                                        std::to_string(u.cols()) + ", system dim is " +
                                        std::to_string(d));
        const double defect = (u.adjoint() * u - CMatrix::Identity(d, d)).norm();
        if (defect > 1e-8)
            fail("system.dynamics", "matrix is not unitary: ‖U†U − I‖_F = " +
                                        std::to_string(defect));
        dynamics.unitary = std::move(u);
    }

    std::vector<MeasurementOperator> operators;
    for (std::size_t k = 0; k < cfg.system.measurement.operators.size(); ++k) {
        const auto& entry = cfg.system.measurement.operators[k];
        const std::string field = "system.measurement.operators[" + std::to_string(k) + "]";
        CMatrix op = resolve_operator(entry.ref, field);
        if (op.rows() != d || op.cols() != d)
            fail(field, "operator is " + std::to_string(op.rows()) + "x" +
                            std::to_string(op.cols()) + ", system dim is " + std::to_string(d));
        operators.push_back(MeasurementOperator{entry.label, std::move(op)});
    }

    std::optional<CVector> reference;
    if (cfg.system.measurement.reference_state) {
        if (cfg.system.measurement.reference_state->size() != d)
            fail("system.measurement.reference_state", "dim must be " + std::to_string(d));
        reference = snap_normalized(*cfg.system.measurement.reference_state,
                                    "system.measurement.reference_state");
    }

    std::optional<MeasurementModel> model;
    try {
        model.emplace(std::move(operators), cfg.system.measurement.norm_kind,
                      cfg.system.measurement.mode, std::move(reference));
    } catch (const IncompleteMeasurement& e) {
        fail("system.measurement.operators",
             std::string("the set must satisfy the completeness relation Σ M†M = I (") +
                 e.what() + ")");
    } catch (const Error& e) {
        fail("system.measurement", e.what());
    }

    NoiseSpec noise;
    noise.process_noise_mode = cfg.system.noise.process_noise_mode;
    if (cfg.system.noise.q) {
        if (cfg.system.noise.q->rows() != d || cfg.system.noise.q->cols() != d)
            fail("system.noise.q", "expected " + std::to_string(d) + "x" + std::to_string(d));
        noise.q = *cfg.system.noise.q;
    } else if (cfg.system.noise.sigma_q && *cfg.system.noise.sigma_q > 0.0) {
        const double s = *cfg.system.noise.sigma_q;
        noise.q = s * s * CMatrix::Identity(d, d);
    }
    Eigen::Index observable_dim = 0;
    for (const auto& entry : model->operators()) observable_dim += entry.op.rows();
    if (cfg.system.noise.r) {
        if (cfg.system.noise.r->rows() != observable_dim ||
            cfg.system.noise.r->cols() != observable_dim)
            fail("system.noise.r", "expected " + std::to_string(observable_dim) + "x" +
                                       std::to_string(observable_dim) +
                                       " (stacked observable dimension)");
        noise.r = *cfg.system.noise.r;
    } else if (cfg.system.noise.sigma_r && *cfg.system.noise.sigma_r > 0.0) {
        const double s = *cfg.system.noise.sigma_r;
        noise.r = s * s * CMatrix::Identity(observable_dim, observable_dim);
    }
    try {
        validate_noise_spec(noise);
    } catch (const Error& e) {
        fail("system.noise", e.what());
    }

    if (cfg.system.initial_state.size() != d)
        fail("system.initial_state", "dim must be " + std::to_string(d));

    SystemSpec spec{
        .dim = d,
        .dynamics = std::move(dynamics),
        .measurement = std::move(*model),
        .noise = std::move(noise),
        .initial_state =
            StateVector{snap_normalized(cfg.system.initial_state, "system.initial_state"), true},
        .renormalize_after_state_noise = cfg.system.renormalize_after_state_noise,
    };
    try {
        validate_system_spec(spec);
    } catch (const Error& e) {
        fail("system", e.what());
    }

    // Battery mode slices R into per-operator diagonal blocks; require the
    // off-diagonal couplings it would drop to be zero.
    if (spec.measurement.mode() == MeasurementMode::battery && spec.noise.r.size() != 0) {
        CMatrix masked = spec.noise.r;
        Eigen::Index at = 0;
        for (const auto& entry : spec.measurement.operators()) {
            masked.block(at, at, entry.op.rows(), entry.op.rows()).setZero();
            at += entry.op.rows();
        }
        if (masked.norm() > 0.0)
            fail("system.noise.r", "battery mode needs block-diagonal R (one block per operator)");
    }

    return spec;
}

EstimatorConfig build_estimator_config(const ExperimentConfig& cfg) {
    EstimatorConfig out;
    out.lambda = cfg.estimator.lambda;
    out.delta = cfg.estimator.delta;
    out.mode = cfg.estimator.mode;
    out.process_noise_mode = cfg.estimator.process_noise_mode;
    validate_estimator_config(out);
    return out;
}

}  // namespace qse
