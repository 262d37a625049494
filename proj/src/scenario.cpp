#include "hhgq/scenario.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "hhgq/hierarchy.hpp"
#include "hhgq/integrator.hpp"
#include "hhgq/observables.hpp"
#include "hhgq/oracle.hpp"

namespace hhgq {

namespace fs = std::filesystem;

constexpr int kSchemaVersion = 1;

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::hierarchy: return "hierarchy";
        case RunMode::oracle: return "oracle";
        case RunMode::compare: return "compare";
        case RunMode::farfield: return "farfield";
    }
    return "hierarchy";
}

RunMode run_mode_from_string(const std::string& name) {
    if (name == "hierarchy") return RunMode::hierarchy;
    if (name == "oracle") return RunMode::oracle;
    if (name == "compare") return RunMode::compare;
    if (name == "farfield") return RunMode::farfield;
    throw ConfigError("unknown run mode '" + name + "' (expected hierarchy, oracle, compare or farfield)");
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out)) throw ConfigError("expected a number, got '" + v + "'");
    return out;
}

std::size_t parse_count(const std::string& v) {
    unsigned long long out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ConfigError("expected a non-negative integer, got '" + v + "'");
    return static_cast<std::size_t>(out);
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("expected true or false, got '" + v + "'");
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

struct KeySpec {
    std::string name;
    std::function<void(Scenario&, const std::string&)> set;
    std::function<std::string(const Scenario&)> get;
};

KeySpec real_key(std::string name, double SystemConfig::*field) {
    return {std::move(name), [field](Scenario& s, const std::string& v) { s.system.*field = parse_double(v); },
            [field](const Scenario& s) { return format_double(s.system.*field); }};
}

KeySpec drive_key(std::string name, double DrivePulse::*field) {
    return {std::move(name), [field](Scenario& s, const std::string& v) { s.system.drive.*field = parse_double(v); },
            [field](const Scenario& s) { return format_double(s.system.drive.*field); }};
}

KeySpec control_key(std::string name, double IntegrationControls::*field) {
    return {std::move(name),
            [field](Scenario& s, const std::string& v) { s.system.integration.*field = parse_double(v); },
            [field](const Scenario& s) { return format_double(s.system.integration.*field); }};
}

KeySpec bool_key(std::string name, bool Scenario::*field) {
    return {std::move(name), [field](Scenario& s, const std::string& v) { s.*field = parse_bool(v); },
            [field](const Scenario& s) { return bool_str(s.*field); }};
}

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = {
        real_key("omega0", &SystemConfig::omega0),
        {"drive_shape", [](Scenario& s, const std::string& v) { s.system.drive.shape = pulse_shape_from_string(v); },
         [](const Scenario& s) { return to_string(s.system.drive.shape); }},
        drive_key("peak_rabi", &DrivePulse::peak_rabi),
        drive_key("carrier", &DrivePulse::carrier),
        drive_key("duration", &DrivePulse::duration),
        drive_key("carrier_phase", &DrivePulse::carrier_phase),
        drive_key("flat_ramp", &DrivePulse::ramp),
        {"omega_min", [](Scenario& s, const std::string& v) { s.system.modes.omega_min = parse_double(v); },
         [](const Scenario& s) { return format_double(s.system.modes.omega_min); }},
        {"omega_max", [](Scenario& s, const std::string& v) { s.system.modes.omega_max = parse_double(v); },
         [](const Scenario& s) { return format_double(s.system.modes.omega_max); }},
        {"mode_count", [](Scenario& s, const std::string& v) { s.system.modes.count = parse_count(v); },
         [](const Scenario& s) { return std::to_string(s.system.modes.count); }},
        real_key("coupling_scale", &SystemConfig::coupling_scale),
        real_key("t_end", &SystemConfig::t_end),
        {"dt",
         [](Scenario& s, const std::string& v) {
             // "auto" resolves to recommended_dt once the whole file is read
             s.system.integration.dt = v == "auto" ? -1.0 : parse_double(v);
         },
         [](const Scenario& s) { return format_double(s.system.integration.dt); }},
        {"sample_every", [](Scenario& s, const std::string& v) { s.system.sample_every = parse_count(v); },
         [](const Scenario& s) { return std::to_string(s.system.sample_every); }},
        {"adaptive", [](Scenario& s, const std::string& v) { s.system.integration.adaptive = parse_bool(v); },
         [](const Scenario& s) { return bool_str(s.system.integration.adaptive); }},
        control_key("rel_tol", &IntegrationControls::rel_tol),
        control_key("abs_tol", &IntegrationControls::abs_tol),
        control_key("max_step_shrink", &IntegrationControls::max_step_shrink),
        {"run", [](Scenario& s, const std::string& v) { s.run = run_mode_from_string(v); },
         [](const Scenario& s) { return to_string(s.run); }},
        {"out_dir", [](Scenario& s, const std::string& v) { s.out_dir = v; },
         [](const Scenario& s) { return s.out_dir; }},
        bool_key("appendix_literal", &Scenario::appendix_literal),
        {"e2_mode",
         [](Scenario& s, const std::string& v) {
             if (v == "paper") {
                 s.e2_mode = SecondMomentMode::PaperLiteral;
             } else if (v == "operator") {
                 s.e2_mode = SecondMomentMode::OperatorConsistent;
             } else {
                 throw ConfigError("expected paper or operator, got '" + v + "'");
             }
         },
         [](const Scenario& s) { return s.e2_mode == SecondMomentMode::PaperLiteral ? "paper" : "operator"; }},
        bool_key("semiclassical_only", &Scenario::semiclassical_only),
        bool_key("emean_mode_sum", &Scenario::emean_mode_sum),
        {"fock_cutoff", [](Scenario& s, const std::string& v) { s.fock_cutoff = parse_count(v); },
         [](const Scenario& s) { return std::to_string(s.fock_cutoff); }},
    };
    return table;
}

const KeySpec* find_key(const std::string& name) {
    for (const auto& k : key_table()) {
        if (k.name == name) return &k;
    }
    return nullptr;
}

// Scenario-level invariants; `where` maps key names to a location suffix.
void check_scenario(const Scenario& s, const std::function<std::string(std::initializer_list<const char*>)>& where) {
    const auto& sys = s.system;
    auto fail = [&](std::initializer_list<const char*> keys, const std::string& msg) {
        throw ConfigError(where(keys) + msg);
    };
    if (!(sys.omega0 >= 0.0)) fail({"omega0"}, "omega0 must be >= 0");
    if (!(sys.t_end > 0.0)) fail({"t_end"}, "t_end must be > 0");
    if (!(sys.integration.dt > 0.0)) fail({"dt"}, "dt must be > 0");
    if (!(sys.coupling_scale >= 0.0)) fail({"coupling_scale"}, "coupling_scale must be >= 0");
    if (sys.sample_every < 1) fail({"sample_every"}, "sample_every must be >= 1");
    if (sys.modes.count < 1) fail({"mode_count"}, "mode_count must be >= 1");
    if (!(sys.modes.omega_min > 0.0)) fail({"omega_min"}, "omega_min must be > 0");
    const bool single = sys.modes.count == 1;
    if (single ? sys.modes.omega_min > sys.modes.omega_max : sys.modes.omega_min >= sys.modes.omega_max) {
        fail({"omega_min", "omega_max"}, "range error: omega_min (" + format_double(sys.modes.omega_min) +
                                             ") must be < omega_max (" + format_double(sys.modes.omega_max) + ")");
    }
    if (!(sys.drive.duration > 0.0)) fail({"duration"}, "duration must be > 0");
    if (s.fock_cutoff < 1) fail({"fock_cutoff"}, "fock_cutoff must be >= 1");
    if ((s.run == RunMode::oracle || s.run == RunMode::compare) && sys.modes.count > kMaxOracleModes) {
        fail({"mode_count", "run"}, "dimension guard: run = " + to_string(s.run) +
                                        " needs mode_count <= 3 (got " + std::to_string(sys.modes.count) +
                                        "); the exact state grows as 2 * (fock_cutoff + 1)^mode_count");
    }
    if (s.run == RunMode::oracle || s.run == RunMode::compare) {
        FockConfig fc;
        fc.modes.resize(sys.modes.count);
        fc.fock_cutoff = s.fock_cutoff;
        try {
            validate(fc);
        } catch (const ConfigError& e) {
            fail({"fock_cutoff", "mode_count"}, std::string("dimension guard: ") + e.what());
        }
    }
    try {
        validate(sys);
    } catch (const ConfigError& e) {
        fail({}, e.what());
    }
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& k : key_table()) out.push_back(k.name);
        return out;
    }();
    return keys;
}

void validate(const Scenario& scenario) {
    check_scenario(scenario, [](std::initializer_list<const char*>) { return std::string(); });
}

Scenario parse_config_text(std::string_view text, const std::string& source) {
    Scenario s;
    std::map<std::string, int> lines;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto prefix = source + ":" + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(prefix + "expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const KeySpec* spec = find_key(key);
        if (spec == nullptr) throw ConfigError(prefix + "unknown key '" + key + "'");
        if (lines.count(key) != 0) {
            throw ConfigError(prefix + "duplicate key '" + key + "' (first set at line " +
                              std::to_string(lines[key]) + ")");
        }
        if (value.empty()) throw ConfigError(prefix + "missing value for '" + key + "'");
        try {
            spec->set(s, value);
        } catch (const ConfigError& e) {
            throw ConfigError(prefix + key + ": " + e.what());
        }
        lines[key] = line_no;
    }
    if (s.system.integration.dt < 0.0 && lines.count("dt") != 0) {
        s.system.integration.dt = recommended_dt(s.system);
    }
    check_scenario(s, [&](std::initializer_list<const char*> keys) {
        std::string loc = source;
        std::string sep = ":";
        for (const char* k : keys) {
            if (auto it = lines.find(k); it != lines.end()) {
                loc += sep + std::to_string(it->second);
                sep = ",";
            }
        }
        return loc + ": ";
    });
    return s;
}

Scenario parse_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path.string());
}

std::string render_config(const Scenario& scenario) {
    std::string out = "# resolved scenario (schema " + std::to_string(kSchemaVersion) + ")\n";
    for (const auto& k : key_table()) out += k.name + " = " + k.get(scenario) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Running

namespace {

class CsvFile {
public:
    CsvFile(const fs::path& path, const std::string& kind) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        out_ << "# hhgq " << kind << " schema " << kSchemaVersion << "\n";
    }

    void header(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
        out_ << "\n";
    }

    CsvFile& operator<<(double v) {
        sep();
        out_ << format_double(v);
        return *this;
    }
    CsvFile& operator<<(int v) {
        sep();
        out_ << v;
        return *this;
    }
    void end_row() {
        out_ << "\n";
        first_ = true;
    }
    void truncated(const std::string& why) { out_ << "# TRUNCATED " << why << "\n"; }
    const fs::path& path() const { return path_; }

private:
    void sep() {
        if (!first_) out_ << ",";
        first_ = false;
    }
    fs::path path_;
    std::ofstream out_;
    bool first_{true};
};

struct ModeRow {
    ModeMoments moments;
    NoiseEllipse ellipse;
};

struct Diagnostics {
    std::size_t samples{0};
    std::size_t negative_photon{0};
    std::size_t heisenberg_violations{0};
    std::size_t negative_variance{0};
    std::size_t squeezed{0};
};

class Outputs {
public:
    Outputs(const Scenario& s, std::span<const ModeCoupling> modes) : scenario_(s), modes_(modes.begin(), modes.end()) {
        const fs::path dir = s.out_dir;
        if (s.run != RunMode::farfield) {
            modes_csv_.emplace(dir / "modes.csv", "modes.csv");
            std::vector<std::string> cols{"t"};
            for (std::size_t n = 0; n < modes_.size(); ++n) {
                const auto k = std::to_string(n);
                for (const char* c : {"N_", "lambda_minus_", "lambda_plus_", "theta_min_", "phi_", "squeezed_"}) {
                    cols.push_back(c + k);
                }
            }
            modes_csv_->header(cols);
            spectrogram_.emplace(dir / "spectrogram.csv", "spectrogram.csv");
            spectrogram_->header({"t", "omega", "N"});
        }
        farfield_.emplace(dir / "farfield.csv", "farfield.csv");
        if (s.semiclassical_only) {
            farfield_->header({"t", "e_mean", "var_semiclassical"});
        } else {
            farfield_->header({"t", "e_mean", "var_full", "var_semiclassical"});
        }
    }

    void sample(double t, const AtomBlock& atom, std::span<const ModeBlock> blocks, double e_mean_full,
                double e2_full) {
        ++diag_.samples;
        if (modes_csv_) {
            *modes_csv_ << t;
            for (std::size_t n = 0; n < blocks.size(); ++n) {
                const ModeMoments mm = moments_of(blocks[n]);
                const NoiseEllipse e = ellipse(mm);
                const bool sq = is_squeezed(e);
                *modes_csv_ << mm.n_mean << e.lambda_minus << e.lambda_plus << e.theta_min << phase(mm)
                            << (sq ? 1 : 0);
                *spectrogram_ << t << modes_[n].omega << mm.n_mean;
                spectrogram_->end_row();
                if (mm.n_mean < 0.0) ++diag_.negative_photon;
                if (e.lambda_plus * e.lambda_minus < 1.0 / 16.0 - 1e-9) ++diag_.heisenberg_violations;
                if (sq) ++diag_.squeezed;
            }
            modes_csv_->end_row();
        }
        const double w0 = scenario_.system.omega0;
        const double drive = drive_value(scenario_.system.drive, t);
        const double sc_mean = -w0 * atom.u + drive * atom.w;
        const double sc_var = w0 * w0 + drive * drive - sc_mean * sc_mean;
        if (scenario_.semiclassical_only) {
            *farfield_ << t << sc_mean << sc_var;
        } else {
            const double var = e2_full - e_mean_full * e_mean_full;
            if (var < -1e-9) ++diag_.negative_variance;
            *farfield_ << t << e_mean_full << var << sc_var;
        }
        farfield_->end_row();
    }

    void truncated(const std::string& why) {
        for (auto* f : {modes_csv_ ? &*modes_csv_ : nullptr, spectrogram_ ? &*spectrogram_ : nullptr,
                        farfield_ ? &*farfield_ : nullptr}) {
            if (f) f->truncated(why);
        }
    }

    std::vector<fs::path> files() const {
        std::vector<fs::path> out;
        if (modes_csv_) out.push_back(modes_csv_->path());
        if (spectrogram_) out.push_back(spectrogram_->path());
        if (farfield_) out.push_back(farfield_->path());
        return out;
    }

    const Diagnostics& diagnostics() const { return diag_; }

private:
    const Scenario& scenario_;
    std::vector<ModeCoupling> modes_;
    std::optional<CsvFile> modes_csv_, spectrogram_, farfield_;
    Diagnostics diag_;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string diagnostics_text(const Diagnostics& d) {
    std::ostringstream out;
    out << "samples = " << d.samples << "\n"
        << "negative_photon_number = " << d.negative_photon << "\n"
        << "heisenberg_violations = " << d.heisenberg_violations << "\n"
        << "negative_field_variance = " << d.negative_variance << "\n"
        << "squeezed_mode_samples = " << d.squeezed << "\n";
    return out.str();
}

RunResult run_compare(const Scenario& s) {
    RunResult result;
    const fs::path dir = s.out_dir;
    const CompareReport report = compare_hierarchy(s.system, CompareOptions{s.fock_cutoff, 0.1});

    CsvFile csv(dir / "compare.csv", "compare.csv");
    std::vector<std::string> cols{"t"};
    for (const auto& n : report.names) cols.push_back("d_" + n);
    cols.push_back("cross_correlation");
    csv.header(cols);
    for (std::size_t k = 0; k < report.times.size(); ++k) {
        csv << report.times[k];
        for (double d : report.deviation[k]) csv << d;
        csv << report.cross_correlation[k];
        csv.end_row();
    }

    std::ostringstream txt;
    txt << "# hhgq compare_report schema " << kSchemaVersion << "\n";
    txt << "samples = " << report.times.size() << "\n";
    txt << "small_photon_samples = " << report.small_photon_samples << "\n";
    txt << "max_abs_dN_small_photon = " << format_double(report.max_dn_small) << "\n";
    txt << "max_abs_dlambda_small_photon = " << format_double(report.max_dlambda_small) << "\n";
    double xc = 0.0;
    for (double c : report.cross_correlation) xc = std::max(xc, c);
    txt << "max_cross_mode_correlation = " << format_double(xc) << "\n";
    txt << "l2_hierarchy_corrected = " << format_double(report.l2_corrected) << "\n";
    txt << "l2_hierarchy_literal = " << format_double(report.l2_literal) << "\n";
    txt << "probe_rhs_deviation_corrected = " << format_double(report.probe_corrected) << "\n";
    txt << "probe_rhs_deviation_literal = " << format_double(report.probe_literal) << "\n";
    txt << "appendix_verdict = " << report.appendix_verdict() << "\n";
    txt << "l2_e2_operator = " << format_double(report.l2_e2_operator) << "\n";
    txt << "l2_e2_paper = " << format_double(report.l2_e2_paper) << "\n";
    txt << "e2_verdict = " << report.e2_verdict() << "\n";
    txt << "# variable, max_abs, rms\n";
    for (const auto& v : report.summary) {
        txt << v.name << ", " << format_double(v.max_abs) << ", " << format_double(v.rms) << "\n";
    }
    write_text(dir / "compare_report.txt", txt.str());
    result.files = {csv.path(), dir / "compare_report.txt"};
    result.message = "appendix_verdict = " + report.appendix_verdict() + ", e2_verdict = " + report.e2_verdict();
    return result;
}

}  // namespace

RunResult run(const Scenario& scenario) {
    validate(scenario);
    const fs::path dir = scenario.out_dir;
    fs::create_directories(dir);
    write_text(dir / "run_meta.cfg", render_config(scenario));

    if (scenario.run == RunMode::compare) {
        RunResult r = run_compare(scenario);
        r.files.push_back(dir / "run_meta.cfg");
        return r;
    }

    RunResult result;
    const HierarchyModel model(scenario.system, HierarchyOptions{scenario.appendix_literal});
    Outputs outputs(scenario, model.modes());
    const FarFieldOptions ff{scenario.e2_mode, scenario.emean_mode_sum};

    try {
        if (scenario.run == RunMode::oracle) {
            const FockConfig fock =
                fock_config_from(scenario.system, scenario.fock_cutoff, DriveConvention::appendix_consistent);
            const FockHamiltonian h(fock);
            propagate(ground_vacuum(fock), fock, scenario.system.t_end, [&](const FockState& st) {
                const ExactMoments ex = extract_moments(st, h);
                outputs.sample(st.t, ex.atom, ex.modes, ex.e_mean, ex.e2_mean);
            });
        } else {
            integrate(initial_state(scenario.system), model, [&](const HierarchyState& st) {
                const auto blocks = st.modes();
                outputs.sample(st.t(), st.atom(), blocks, e_mean(st, model, ff),
                               e_second_moment(st, model, ff.e2_mode));
            });
        }
    } catch (const DivergenceError& e) {
        outputs.truncated(e.what());
        result.exit_code = 2;
        result.message = e.what();
    } catch (const UnitarityError& e) {
        outputs.truncated(e.what());
        result.exit_code = 2;
        result.message = e.what();
    }
    write_text(dir / "diagnostics.txt", diagnostics_text(outputs.diagnostics()));
    result.files = outputs.files();
    result.files.push_back(dir / "diagnostics.txt");
    result.files.push_back(dir / "run_meta.cfg");
    return result;
}

}  // namespace hhgq
