#include "dyad/config.hpp"

#include "dyad/util.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace dyad {

namespace {

constexpr double kFpLambda = 5.656854249492380195206754896838;  // 2^{5/2}

ModelKind parse_kind(const std::string& v) {
    if (v == "generic") return ModelKind::GenericChain;
    if (v == "kp") return ModelKind::KatzPavlovic;
    if (v == "fp") return ModelKind::FriedlanderPavlovic;
    if (v == "obukhov") return ModelKind::Obukhov;
    throw std::invalid_argument("unknown model.kind '" + v + "' (generic|kp|fp|obukhov)");
}

InitialKind parse_initial_kind(const std::string& v) {
    if (v == "single_shell") return InitialKind::SingleShell;
    if (v == "seed") return InitialKind::Seed;
    if (v == "powerlaw") return InitialKind::Powerlaw;
    if (v == "explicit") return InitialKind::Explicit;
    throw std::invalid_argument("unknown initial.kind '" + v +
                                "' (single_shell|seed|powerlaw|explicit)");
}

const char* initial_kind_name(InitialKind k) {
    switch (k) {
        case InitialKind::SingleShell: return "single_shell";
        case InitialKind::Seed: return "seed";
        case InitialKind::Powerlaw: return "powerlaw";
        case InitialKind::Explicit: return "explicit";
    }
    return "?";
}

std::vector<double> parse_double_list(const std::string& v) {
    std::vector<double> out;
    for (const std::string& tok : split(v, ',')) {
        if (tok.empty()) continue;
        out.push_back(parse_double(tok));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& v) {
    std::vector<int> out;
    for (const std::string& tok : split(v, ',')) {
        if (tok.empty()) continue;
        out.push_back(static_cast<int>(parse_long(tok)));
    }
    return out;
}

// Staging area: raw values land here before cross-field checks.
struct Staging {
    RunConfig cfg;
    bool viscosity_nu_set = false;
    bool viscosity_exp_set = false;
    double viscosity_nu = 0.0;
    double viscosity_exp = 2.0;
    bool lambda_set = false;
};

using Setter = std::function<void(Staging&, const std::string&)>;

const std::map<std::string, Setter>& key_table() {
    static const std::map<std::string, Setter> table = {
        {"model.kind", [](Staging& s, const std::string& v) { s.cfg.model.kind = parse_kind(v); }},
        {"model.lambda",
         [](Staging& s, const std::string& v) {
             s.cfg.model.lambda = parse_double(v);
             s.lambda_set = true;
             if (!(s.cfg.model.lambda > 1.0))
                 throw std::invalid_argument("model.lambda must be > 1");
         }},
        {"model.j0",
         [](Staging& s, const std::string& v) { s.cfg.model.j0 = static_cast<int>(parse_long(v)); }},
        {"model.n_shells",
         [](Staging& s, const std::string& v) {
             s.cfg.model.n_shells = static_cast<int>(parse_long(v));
             if (s.cfg.model.n_shells < 2)
                 throw std::invalid_argument("model.n_shells must be >= 2");
         }},
        {"model.viscosity_nu",
         [](Staging& s, const std::string& v) {
             s.viscosity_nu = parse_double(v);
             s.viscosity_nu_set = true;
             if (s.viscosity_nu < 0.0)
                 throw std::invalid_argument("model.viscosity_nu must be >= 0");
         }},
        {"model.viscosity_exponent",
         [](Staging& s, const std::string& v) {
             s.viscosity_exp = parse_double(v);
             s.viscosity_exp_set = true;
         }},
        {"initial.kind",
         [](Staging& s, const std::string& v) { s.cfg.initial.kind = parse_initial_kind(v); }},
        {"initial.shell",
         [](Staging& s, const std::string& v) {
             s.cfg.initial.shell = static_cast<int>(parse_long(v));
         }},
        {"initial.amplitude",
         [](Staging& s, const std::string& v) { s.cfg.initial.amplitude = parse_double(v); }},
        {"initial.seed_shell",
         [](Staging& s, const std::string& v) {
             s.cfg.initial.seed_shell = static_cast<int>(parse_long(v));
         }},
        {"initial.seed_q",
         [](Staging& s, const std::string& v) {
             s.cfg.initial.seed_q = parse_double(v);
             if (!(s.cfg.initial.seed_q > 0.0 && s.cfg.initial.seed_q < 1.0))
                 throw std::invalid_argument("initial.seed_q must lie in (0, 1)");
         }},
        {"initial.seed_energy",
         [](Staging& s, const std::string& v) {
             s.cfg.initial.seed_energy = parse_double(v);
             if (s.cfg.initial.seed_energy < 0.0)
                 throw std::invalid_argument("initial.seed_energy must be >= 0");
         }},
        {"initial.flux",
         [](Staging& s, const std::string& v) {
             s.cfg.initial.flux = parse_double(v);
             if (s.cfg.initial.flux < 0.0)
                 throw std::invalid_argument("initial.flux must be >= 0");
         }},
        {"initial.values",
         [](Staging& s, const std::string& v) { s.cfg.initial.values = parse_double_list(v); }},
        {"integrator.rel_tol",
         [](Staging& s, const std::string& v) {
             s.cfg.integrator.rel_tol = parse_double(v);
             if (!(s.cfg.integrator.rel_tol > 0.0))
                 throw std::invalid_argument("integrator.rel_tol must be > 0");
         }},
        {"integrator.abs_tol",
         [](Staging& s, const std::string& v) {
             s.cfg.integrator.abs_tol = parse_double(v);
             if (!(s.cfg.integrator.abs_tol > 0.0))
                 throw std::invalid_argument("integrator.abs_tol must be > 0");
         }},
        {"integrator.max_step",
         [](Staging& s, const std::string& v) {
             s.cfg.integrator.max_step = parse_double(v);
             if (s.cfg.integrator.max_step < 0.0)
                 throw std::invalid_argument("integrator.max_step must be >= 0");
         }},
        {"integrator.t_end",
         [](Staging& s, const std::string& v) {
             s.cfg.integrator.t_end = parse_double(v);
             if (!(s.cfg.integrator.t_end > 0.0))
                 throw std::invalid_argument("integrator.t_end must be > 0");
         }},
        {"integrator.stop_norm",
         [](Staging& s, const std::string& v) {
             s.cfg.integrator.stop_norm = parse_double(v);
             if (!(s.cfg.integrator.stop_norm > 1.0))
                 throw std::invalid_argument("integrator.stop_norm must be > 1");
         }},
        {"integrator.record_stride",
         [](Staging& s, const std::string& v) {
             s.cfg.integrator.record_stride = static_cast<int>(parse_long(v));
             if (s.cfg.integrator.record_stride < 1)
                 throw std::invalid_argument("integrator.record_stride must be >= 1");
         }},
        {"integrator.min_step_scale",
         [](Staging& s, const std::string& v) {
             s.cfg.integrator.min_step_scale = parse_double(v);
             if (!(s.cfg.integrator.min_step_scale > 0.0))
                 throw std::invalid_argument("integrator.min_step_scale must be > 0");
         }},
        {"analysis.alpha",
         [](Staging& s, const std::string& v) {
             s.cfg.analysis.alphas = parse_double_list(v);
             for (double a : s.cfg.analysis.alphas)
                 if (!(a > 0.0)) throw std::invalid_argument("analysis.alpha entries must be > 0");
         }},
        {"analysis.mu",
         [](Staging& s, const std::string& v) {
             s.cfg.analysis.mu = parse_double(v);
             if (!(s.cfg.analysis.mu > 1.0))
                 throw std::invalid_argument("analysis.mu must be > 1");
         }},
        {"analysis.delta",
         [](Staging& s, const std::string& v) { s.cfg.analysis.delta = parse_double(v); }},
        {"analysis.epsilon",
         [](Staging& s, const std::string& v) {
             s.cfg.analysis.fp_epsilon = parse_double(v);
             if (!(*s.cfg.analysis.fp_epsilon > 0.0))
                 throw std::invalid_argument("analysis.epsilon must be > 0");
         }},
        {"analysis.cascade",
         [](Staging& s, const std::string& v) { s.cfg.analysis.cascade = parse_bool(v); }},
        {"analysis.certificate",
         [](Staging& s, const std::string& v) { s.cfg.analysis.certificate = parse_bool(v); }},
        {"analysis.fit_tstar",
         [](Staging& s, const std::string& v) { s.cfg.analysis.fit_tstar = parse_bool(v); }},
        {"analysis.cascade_start",
         [](Staging& s, const std::string& v) {
             s.cfg.analysis.cascade_start = static_cast<int>(parse_long(v));
         }},
        {"analysis.tail_shells",
         [](Staging& s, const std::string& v) {
             s.cfg.analysis.tail_shells = parse_int_list(v);
         }},
        {"output.dir",
         [](Staging& s, const std::string& v) {
             if (v.empty()) throw std::invalid_argument("output.dir must not be empty");
             s.cfg.output.dir = v;
         }},
        {"output.stride",
         [](Staging& s, const std::string& v) {
             s.cfg.output.stride = static_cast<int>(parse_long(v));
             if (s.cfg.output.stride < 1)
                 throw std::invalid_argument("output.stride must be >= 1");
         }},
        {"output.formats",
         [](Staging& s, const std::string& v) {
             if (v != "csv") throw std::invalid_argument("output.formats: only 'csv' is supported");
             s.cfg.output.formats = v;
         }},
    };
    return table;
}

// Cross-field checks; messages name the offending key so parse_config can
// attach line numbers.
std::vector<std::string> finalize(Staging& s) {
    std::vector<std::string> errors;
    RunConfig& cfg = s.cfg;
    ModelParams& m = cfg.model;

    switch (m.kind) {
        case ModelKind::GenericChain:
            m.lhs_scale = 1.0;
            break;
        case ModelKind::KatzPavlovic:
            m.lhs_scale = 8.0;
            if (s.lambda_set && m.lambda != 2.0)
                errors.push_back("model.lambda: kind 'kp' fixes lambda = 2");
            m.lambda = 2.0;
            break;
        case ModelKind::FriedlanderPavlovic:
            m.lhs_scale = 2.0;
            if (s.lambda_set && std::abs(m.lambda - kFpLambda) > 1e-12 * kFpLambda)
                errors.push_back("model.lambda: kind 'fp' fixes lambda = 2^(5/2)");
            m.lambda = kFpLambda;
            break;
        case ModelKind::Obukhov:
            m.lhs_scale = std::cbrt(m.lambda);
            break;
    }
    if ((s.viscosity_nu_set || s.viscosity_exp_set) && m.kind != ModelKind::Obukhov)
        errors.push_back("model.viscosity_nu: viscosity applies to the Obukhov model only");
    if (m.kind == ModelKind::Obukhov && (s.viscosity_nu_set || s.viscosity_exp_set))
        m.viscosity = Viscosity{s.viscosity_nu, s.viscosity_exp};

    const int last = m.j0 + m.n_shells - 1;
    switch (cfg.initial.kind) {
        case InitialKind::SingleShell:
            if (cfg.initial.shell < m.j0 || cfg.initial.shell > last)
                errors.push_back("initial.shell: outside the truncation range");
            break;
        case InitialKind::Seed:
            if (cfg.initial.seed_shell < m.j0 || cfg.initial.seed_shell > last)
                errors.push_back("initial.seed_shell: outside the truncation range");
            break;
        case InitialKind::Powerlaw:
            if (m.kind != ModelKind::Obukhov)
                errors.push_back("initial.kind: powerlaw initial data requires model.kind = obukhov");
            break;
        case InitialKind::Explicit:
            if (static_cast<int>(cfg.initial.values.size()) != m.n_shells)
                errors.push_back("initial.values: length must equal model.n_shells");
            break;
    }
    if (cfg.analysis.cascade_start &&
        (*cfg.analysis.cascade_start < m.j0 || *cfg.analysis.cascade_start > last))
        errors.push_back("analysis.cascade_start: outside the truncation range");
    for (int j : cfg.analysis.tail_shells)
        if (j < m.j0 || j > last) {
            errors.push_back("analysis.tail_shells: entry outside the truncation range");
            break;
        }
    if ((cfg.analysis.cascade || cfg.analysis.certificate) && cfg.analysis.alphas.empty())
        cfg.analysis.alphas.push_back(1.0);
    try {
        m.validate();
    } catch (const std::exception& ex) {
        errors.push_back(std::string("model: ") + ex.what());
    }
    return errors;
}

int line_of_key(const std::vector<std::pair<std::string, int>>& key_lines,
                const std::string& message) {
    for (const auto& [key, line] : key_lines) {
        if (message.rfind(key, 0) == 0) return line;
    }
    return 0;
}

}  // namespace

ParseResult parse_config(const std::string& text) {
    ParseResult result;
    Staging staging;
    std::vector<std::pair<std::string, int>> key_lines;
    std::set<std::string> seen;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            result.errors.push_back({line_no, "expected 'section.key = value'"});
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto& table = key_table();
        auto it = table.find(key);
        if (it == table.end()) {
            result.errors.push_back({line_no, "unknown key '" + key + "'"});
            continue;
        }
        if (!seen.insert(key).second) {
            result.errors.push_back({line_no, "duplicate key '" + key + "'"});
            continue;
        }
        key_lines.emplace_back(key, line_no);
        try {
            it->second(staging, value);
        } catch (const std::exception& ex) {
            result.errors.push_back({line_no, key + ": " + ex.what()});
        }
    }

    for (const std::string& msg : finalize(staging))
        result.errors.push_back({line_of_key(key_lines, msg), msg});

    if (result.errors.empty()) result.config = staging.cfg;
    return result;
}

ParseResult parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        ParseResult r;
        r.errors.push_back({0, "cannot open config file '" + path + "'"});
        return r;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string render_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "model.kind = " << to_string(cfg.model.kind) << "\n";
    out << "model.lambda = " << format_double(cfg.model.lambda) << "\n";
    out << "model.j0 = " << cfg.model.j0 << "\n";
    out << "model.n_shells = " << cfg.model.n_shells << "\n";
    if (cfg.model.viscosity) {
        out << "model.viscosity_nu = " << format_double(cfg.model.viscosity->nu) << "\n";
        out << "model.viscosity_exponent = " << format_double(cfg.model.viscosity->exponent)
            << "\n";
    }
    out << "initial.kind = " << initial_kind_name(cfg.initial.kind) << "\n";
    switch (cfg.initial.kind) {
        case InitialKind::SingleShell:
            out << "initial.shell = " << cfg.initial.shell << "\n";
            out << "initial.amplitude = " << format_double(cfg.initial.amplitude) << "\n";
            break;
        case InitialKind::Seed:
            out << "initial.seed_shell = " << cfg.initial.seed_shell << "\n";
            out << "initial.seed_q = " << format_double(cfg.initial.seed_q) << "\n";
            out << "initial.seed_energy = " << format_double(cfg.initial.seed_energy) << "\n";
            break;
        case InitialKind::Powerlaw:
            out << "initial.flux = " << format_double(cfg.initial.flux) << "\n";
            break;
        case InitialKind::Explicit: {
            out << "initial.values = ";
            for (std::size_t i = 0; i < cfg.initial.values.size(); ++i) {
                if (i) out << ", ";
                out << format_double(cfg.initial.values[i]);
            }
            out << "\n";
            break;
        }
    }
    out << "integrator.rel_tol = " << format_double(cfg.integrator.rel_tol) << "\n";
    out << "integrator.abs_tol = " << format_double(cfg.integrator.abs_tol) << "\n";
    out << "integrator.max_step = " << format_double(cfg.integrator.max_step) << "\n";
    out << "integrator.t_end = " << format_double(cfg.integrator.t_end) << "\n";
    out << "integrator.stop_norm = " << format_double(cfg.integrator.stop_norm) << "\n";
    out << "integrator.record_stride = " << cfg.integrator.record_stride << "\n";
    out << "integrator.min_step_scale = " << format_double(cfg.integrator.min_step_scale)
        << "\n";
    if (!cfg.analysis.alphas.empty()) {
        out << "analysis.alpha = ";
        for (std::size_t i = 0; i < cfg.analysis.alphas.size(); ++i) {
            if (i) out << ", ";
            out << format_double(cfg.analysis.alphas[i]);
        }
        out << "\n";
    }
    out << "analysis.mu = " << format_double(cfg.analysis.mu) << "\n";
    out << "analysis.delta = " << format_double(cfg.analysis.delta) << "\n";
    if (cfg.analysis.fp_epsilon)
        out << "analysis.epsilon = " << format_double(*cfg.analysis.fp_epsilon) << "\n";
    out << "analysis.cascade = " << (cfg.analysis.cascade ? "true" : "false") << "\n";
    out << "analysis.certificate = " << (cfg.analysis.certificate ? "true" : "false") << "\n";
    out << "analysis.fit_tstar = " << (cfg.analysis.fit_tstar ? "true" : "false") << "\n";
    if (cfg.analysis.cascade_start)
        out << "analysis.cascade_start = " << *cfg.analysis.cascade_start << "\n";
    if (!cfg.analysis.tail_shells.empty()) {
        out << "analysis.tail_shells = ";
        for (std::size_t i = 0; i < cfg.analysis.tail_shells.size(); ++i) {
            if (i) out << ", ";
            out << cfg.analysis.tail_shells[i];
        }
        out << "\n";
    }
    out << "output.dir = " << cfg.output.dir << "\n";
    out << "output.stride = " << cfg.output.stride << "\n";
    out << "output.formats = " << cfg.output.formats << "\n";
    return out.str();
}

BlowupConstants RunConfig::constants() const {
    const double alpha = analysis.alphas.empty() ? 1.0 : analysis.alphas.front();
    if (analysis.fp_epsilon) {
        const double eps = *analysis.fp_epsilon;
        return check_constants(model.lambda, analysis.mu, alpha,
                               std::pow(2.0, -3.0 - eps), std::pow(2.0, -eps));
    }
    return pick_constants(model.lambda, analysis.mu, alpha, analysis.delta);
}

std::optional<int> RunConfig::cascade_start_shell(const ShellState& initial_state) const {
    if (analysis.cascade_start) return *analysis.cascade_start;
    if (initial.kind == InitialKind::Seed) return initial.seed_shell;
    const BlowupConstants c = constants();
    for (int j = model.j0; j <= model.last_shell(); ++j) {
        if (tail_energy(initial_state, j) >= std::pow(c.q, j)) return j;
    }
    return std::nullopt;
}

ShellState build_initial_state(const RunConfig& cfg) {
    ShellState state;
    state.t = 0.0;
    state.j0 = cfg.model.j0;
    switch (cfg.initial.kind) {
        case InitialKind::SingleShell:
            state.a = ArrayXd::Zero(cfg.model.n_shells);
            state.a[cfg.initial.shell - cfg.model.j0] = cfg.initial.amplitude;
            break;
        case InitialKind::Seed:
            return seed_state(cfg.model, cfg.initial.seed_shell, cfg.initial.seed_q,
                              cfg.initial.seed_energy);
        case InitialKind::Powerlaw:
            return obukhov_powerlaw_state(cfg.model, cfg.initial.flux);
        case InitialKind::Explicit:
            state.a = Eigen::Map<const ArrayXd>(cfg.initial.values.data(),
                                                static_cast<long>(cfg.initial.values.size()));
            break;
    }
    return state;
}

void apply_override(RunConfig& config, const std::string& key, const std::string& value) {
    Staging staging;
    staging.cfg = config;
    // Overrides arrive after a parse; re-derive the explicit-value markers
    // that matter for cross-checks.
    staging.viscosity_nu_set = config.model.viscosity.has_value();
    staging.viscosity_exp_set = config.model.viscosity.has_value();
    if (config.model.viscosity) {
        staging.viscosity_nu = config.model.viscosity->nu;
        staging.viscosity_exp = config.model.viscosity->exponent;
    }
    staging.lambda_set = false;

    const auto& table = key_table();
    auto it = table.find(key);
    if (it == table.end()) throw std::invalid_argument("unknown key '" + key + "'");
    it->second(staging, value);
    const auto errors = finalize(staging);
    if (!errors.empty()) throw std::invalid_argument(errors.front());
    config = staging.cfg;
}

}  // namespace dyad
