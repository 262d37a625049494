#include "hhgq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "hhgq/integrator.hpp"

namespace hhgq {

void validate(const FockConfig& cfg) {
    if (cfg.modes.size() > kMaxOracleModes) {
        throw ConfigError("oracle supports at most 3 modes (got " + std::to_string(cfg.modes.size()) + ")");
    }
    if (cfg.fock_cutoff < 1) throw ConfigError("fock_cutoff must be >= 1");
    if (!(cfg.dt > 0.0)) throw ConfigError("oracle dt must be > 0");
    if (cfg.sample_every < 1) throw ConfigError("oracle sample_every must be >= 1");
    double dim = 2.0;
    for (std::size_t n = 0; n < cfg.modes.size(); ++n) dim *= static_cast<double>(cfg.fock_cutoff + 1);
    if (dim > static_cast<double>(kMaxOracleDim)) {
        throw ConfigError("oracle dimension " + std::to_string(static_cast<long long>(dim)) + " exceeds 10^6");
    }
}

std::size_t fock_dimension(const FockConfig& cfg) {
    std::size_t dim = 2;
    for (std::size_t n = 0; n < cfg.modes.size(); ++n) dim *= cfg.fock_cutoff + 1;
    return dim;
}

FockConfig fock_config_from(const SystemConfig& config, std::size_t fock_cutoff, DriveConvention convention) {
    FockConfig cfg;
    cfg.omega0 = config.omega0;
    cfg.drive = config.drive;
    cfg.modes = build_mode_grid(config);
    cfg.fock_cutoff = fock_cutoff;
    cfg.dt = config.integration.dt;
    cfg.sample_every = config.sample_every;
    cfg.convention = convention;
    validate(cfg);
    return cfg;
}

double FockState::norm() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return std::sqrt(s);
}

FockState ground_vacuum(const FockConfig& cfg) {
    validate(cfg);
    FockState s;
    s.amplitudes.assign(fock_dimension(cfg), cplx{});
    s.amplitudes[0] = 1.0;
    return s;
}

FockState product_state(const FockConfig& cfg, cplx c_g, cplx c_e, std::span<const std::vector<cplx>> mode_states) {
    validate(cfg);
    if (mode_states.size() != cfg.modes.size()) {
        throw std::invalid_argument("product_state: need one amplitude vector per mode");
    }
    const std::size_t levels = cfg.fock_cutoff + 1;
    for (const auto& v : mode_states) {
        if (v.size() != levels) throw std::invalid_argument("product_state: mode vector length != cutoff + 1");
    }
    FockState s;
    s.amplitudes.assign(fock_dimension(cfg), cplx{});
    for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
        cplx amp = (i & 1U) ? c_e : c_g;
        std::size_t rest = i >> 1U;
        for (const auto& v : mode_states) {
            amp *= v[rest % levels];
            rest /= levels;
        }
        s.amplitudes[i] = amp;
    }
    return s;
}

std::vector<cplx> coherent_amplitudes(cplx alpha, std::size_t cutoff) {
    std::vector<cplx> out(cutoff + 1);
    cplx term = std::exp(-0.5 * std::norm(alpha));
    for (std::size_t n = 0; n <= cutoff; ++n) {
        out[n] = term;
        term *= alpha / std::sqrt(static_cast<double>(n + 1));
    }
    return out;
}

// ---------------------------------------------------------------------------

FockHamiltonian::FockHamiltonian(FockConfig cfg) : cfg_(std::move(cfg)) {
    validate(cfg_);
    dim_ = fock_dimension(cfg_);
    const std::size_t m = cfg_.modes.size();
    const std::size_t levels = cfg_.fock_cutoff + 1;
    strides_.resize(m);
    std::size_t stride = 2;
    for (std::size_t n = 0; n < m; ++n) {
        strides_[n] = stride;
        stride *= levels;
    }
    occupation_.resize(dim_ * m);
    diag_.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        double e = (i & 1U) ? 0.5 * cfg_.omega0 : -0.5 * cfg_.omega0;
        std::size_t rest = i >> 1U;
        for (std::size_t n = 0; n < m; ++n) {
            const auto occ = static_cast<std::uint16_t>(rest % levels);
            rest /= levels;
            occupation_[i * m + n] = occ;
            e += cfg_.modes[n].omega * occ;
        }
        diag_[i] = e;
    }
}

double FockHamiltonian::drive_coefficient(double t) const noexcept {
    const double half = 0.5 * drive_value(cfg_.drive, t);
    return cfg_.convention == DriveConvention::hamiltonian_literal ? -half : half;
}

void FockHamiltonian::apply_offdiagonal(double t, std::span<const cplx> psi, std::span<cplx> out) const {
    if (psi.size() != dim_ || out.size() != dim_) {
        throw std::invalid_argument("FockHamiltonian: state dimension " + std::to_string(psi.size()) +
                                    " != " + std::to_string(dim_));
    }
    const std::size_t m = cfg_.modes.size();
    const std::size_t top = cfg_.fock_cutoff;
    const double c = drive_coefficient(t);
    // Gather form: out_j = c psi_{j^1} + sum_n Omega_n/2 (sqrt(n_j + 1) psi_{j^1 + s_n} + sqrt(n_j) psi_{j^1 - s_n})
    for (std::size_t j = 0; j < dim_; ++j) {
        const std::size_t flipped = j ^ 1U;
        cplx acc = c * psi[flipped];
        const std::uint16_t* occ = occupation_.data() + j * m;
        for (std::size_t n = 0; n < m; ++n) {
            const double half = 0.5 * cfg_.modes[n].rabi;
            const std::size_t k = occ[n];
            if (k < top) acc += half * std::sqrt(static_cast<double>(k + 1)) * psi[flipped + strides_[n]];
            if (k > 0) acc += half * std::sqrt(static_cast<double>(k)) * psi[flipped - strides_[n]];
        }
        out[j] = acc;
    }
}

void FockHamiltonian::apply(double t, std::span<const cplx> psi, std::span<cplx> out) const {
    apply_offdiagonal(t, psi, out);
    for (std::size_t j = 0; j < dim_; ++j) out[j] += diag_[j] * psi[j];
}

void FockHamiltonian::apply_lower(std::size_t n, std::span<const cplx> psi, std::span<cplx> out) const {
    const std::size_t m = cfg_.modes.size();
    const std::size_t top = cfg_.fock_cutoff;
    for (std::size_t j = 0; j < dim_; ++j) {
        const std::size_t k = occupation_[j * m + n];
        out[j] = k < top ? std::sqrt(static_cast<double>(k + 1)) * psi[j + strides_[n]] : cplx{};
    }
}

void FockHamiltonian::apply_raise(std::size_t n, std::span<const cplx> psi, std::span<cplx> out) const {
    const std::size_t m = cfg_.modes.size();
    for (std::size_t j = 0; j < dim_; ++j) {
        const std::size_t k = occupation_[j * m + n];
        out[j] = k > 0 ? std::sqrt(static_cast<double>(k)) * psi[j - strides_[n]] : cplx{};
    }
}

std::vector<cplx> apply_hamiltonian(const FockState& state, double t, const FockConfig& cfg) {
    const FockHamiltonian h(cfg);
    std::vector<cplx> out(h.dim());
    h.apply(t, state.amplitudes, out);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

class InteractionPicture {
public:
    InteractionPicture(const FockHamiltonian& h, double t0) : h_(h), t0_(t0), phase_(h.dim()), tmp_(h.dim()) {}

    // d psi_I / dt = -i D(t)^* V(t) D(t) psi_I with D(t) = diag(exp(-i E (t - t0)))
    void rhs(double t, std::span<const cplx> psi, std::span<cplx> out) {
        set_phases(t);
        for (std::size_t j = 0; j < psi.size(); ++j) tmp_[j] = phase_[j] * psi[j];
        h_.apply_offdiagonal(t, tmp_, out);
        for (std::size_t j = 0; j < psi.size(); ++j) out[j] = cplx(0.0, -1.0) * std::conj(phase_[j]) * out[j];
    }

    void to_lab(double t, std::span<const cplx> psi_i, std::span<cplx> out) {
        set_phases(t);
        for (std::size_t j = 0; j < psi_i.size(); ++j) out[j] = phase_[j] * psi_i[j];
    }

private:
    void set_phases(double t) {
        if (t == phase_time_) return;
        const double tau = t - t0_;
        for (std::size_t j = 0; j < phase_.size(); ++j) phase_[j] = std::polar(1.0, -h_.diagonal(j) * tau);
        phase_time_ = t;
    }

    const FockHamiltonian& h_;
    double t0_;
    std::vector<cplx> phase_;
    std::vector<cplx> tmp_;
    double phase_time_{std::nan("")};
};

}  // namespace

FockState propagate(const FockState& initial, const FockConfig& cfg, double t_end, const FockObserver& observer) {
    const FockHamiltonian h(cfg);
    if (initial.amplitudes.size() != h.dim()) {
        throw std::invalid_argument("propagate: state dimension does not match the Fock configuration");
    }
    const double span = t_end - initial.t;
    FockState lab = initial;
    if (span == 0.0) {
        if (observer) observer(lab);
        return lab;
    }
    const double direction = span > 0.0 ? 1.0 : -1.0;
    const StepSchedule schedule(std::abs(span), cfg.dt, cfg.sample_every);
    const double t0 = initial.t;
    const double norm0 = initial.norm();

    InteractionPicture picture(h, t0);
    const std::size_t dim = h.dim();
    std::vector<cplx> psi = initial.amplitudes;
    std::vector<cplx> k1(dim), k2(dim), k3(dim), k4(dim), stage(dim);
    auto f = [&picture](double t, std::span<const cplx> y, std::span<cplx> out) { picture.rhs(t, y, out); };

    // RK4 shrinks the norm by about (h |V|)^6 / 144 per step; split each grid
    // step so h |V| stays below 0.02 whatever the drive strength.
    double coupling_bound = 0.5 * std::abs(cfg.drive.peak_rabi);
    for (const auto& m : cfg.modes) coupling_bound += std::abs(m.rabi) * std::sqrt(static_cast<double>(cfg.fock_cutoff));
    const std::size_t substeps =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cfg.dt * coupling_bound / 0.02)));

    if (observer) observer(lab);
    for (std::size_t k = 1; k <= schedule.steps(); ++k) {
        const double ta = t0 + direction * schedule.time(k - 1);
        const double tb = k == schedule.steps() ? t_end : t0 + direction * schedule.time(k);
        for (std::size_t s = 0; s < substeps; ++s) {
            const double sa = ta + (tb - ta) * static_cast<double>(s) / static_cast<double>(substeps);
            const double sb = s + 1 == substeps ? tb : ta + (tb - ta) * static_cast<double>(s + 1) / static_cast<double>(substeps);
            const double dt = sb - sa;
            f(sa, psi, k1);
            for (std::size_t j = 0; j < dim; ++j) stage[j] = psi[j] + 0.5 * dt * k1[j];
            f(sa + 0.5 * dt, stage, k2);
            for (std::size_t j = 0; j < dim; ++j) stage[j] = psi[j] + 0.5 * dt * k2[j];
            f(sa + 0.5 * dt, stage, k3);
            for (std::size_t j = 0; j < dim; ++j) stage[j] = psi[j] + dt * k3[j];
            f(sb, stage, k4);
            for (std::size_t j = 0; j < dim; ++j) psi[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }

        if (schedule.is_sample(k) || k == schedule.steps()) {
            lab.t = tb;
            picture.to_lab(tb, psi, lab.amplitudes);
            const double drift = std::abs(lab.norm() - norm0);
            if (!std::isfinite(drift) || drift > 1e-6) {
                char buf[200];
                std::snprintf(buf, sizeof buf,
                              "oracle norm drift %.3g at t = %.17g exceeds 1e-6 (dt = %.3g, %zu substeps)",
                              drift, tb, cfg.dt, substeps);
                throw UnitarityError(buf);
            }
            if (observer) observer(lab);
        }
    }
    return lab;
}

// ---------------------------------------------------------------------------

namespace {

cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
    cplx s{};
    for (std::size_t j = 0; j < a.size(); ++j) s += std::conj(a[j]) * b[j];
    return s;
}

}  // namespace

HierarchyState ExactMoments::as_hierarchy(double t) const { return HierarchyState::pack(t, atom, modes); }

double ExactMoments::max_cross_correlation() const {
    const std::size_t m = modes.size();
    double worst = 0.0;
    for (std::size_t n = 0; n < m; ++n) {
        for (std::size_t k = 0; k < m; ++k) {
            if (k != n) worst = std::max(worst, std::abs(xx[n * m + k] - modes[n][kX] * modes[k][kX]));
        }
    }
    return worst;
}

ExactMoments extract_moments(const FockState& state, const FockHamiltonian& h) {
    const std::size_t dim = h.dim();
    const std::size_t m = h.modes();
    const auto& psi = state.amplitudes;
    if (psi.size() != dim) throw std::invalid_argument("extract_moments: dimension mismatch");
    const auto& cfg = h.config();

    // sigma_k psi
    std::vector<cplx> sx(dim), sy(dim), sz(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        const bool excited = (j & 1U) != 0;
        sx[j] = psi[j ^ 1U];
        // sy |g> = -i |e>, sy |e> = i |g>
        sy[j] = excited ? cplx(0.0, -1.0) * psi[j ^ 1U] : cplx(0.0, 1.0) * psi[j ^ 1U];
        sz[j] = excited ? psi[j] : -psi[j];
    }

    ExactMoments out;
    out.norm = state.norm();
    out.atom = {inner(psi, sx).real(), -inner(psi, sy).real(), inner(psi, sz).real()};
    out.modes.resize(m);
    out.xx.assign(m * m, 0.0);

    std::vector<std::vector<cplx>> q(m, std::vector<cplx>(dim));
    std::vector<cplx> lower(dim), raise(dim), lower2(dim), p(dim);
    for (std::size_t n = 0; n < m; ++n) {
        h.apply_lower(n, psi, lower);
        h.apply_raise(n, psi, raise);
        h.apply_lower(n, lower, lower2);
        for (std::size_t j = 0; j < dim; ++j) {
            q[n][j] = lower[j] + raise[j];
            p[j] = cplx(0.0, 1.0) * (lower[j] - raise[j]);
        }
        const cplx a1 = inner(psi, lower);
        const cplx a2 = inner(psi, lower2);
        auto& b = out.modes[n];
        b[kN] = inner(lower, lower).real();
        b[kUp] = inner(sx, q[n]).real();
        b[kUm] = inner(sx, p).real();
        b[kVp] = -inner(sy, q[n]).real();
        b[kVm] = -inner(sy, p).real();
        b[kWp] = inner(sz, q[n]).real();
        b[kWm] = inner(sz, p).real();
        b[kX] = a1.real();
        b[kY] = a1.imag();
        b[kX2] = a2.real();
        b[kY2] = a2.imag();
    }
    for (std::size_t n = 0; n < m; ++n) {
        for (std::size_t k = 0; k < m; ++k) out.xx[n * m + k] = 0.25 * inner(q[n], q[k]).real();
    }

    // E = -w0 sx + kappa Omega sz + sum_n Omega_n sz q_n, with kappa chosen so that E = dV/dt
    const double drive = drive_value(cfg.drive, state.t);
    const double kappa = cfg.convention == DriveConvention::hamiltonian_literal ? -1.0 : 1.0;
    out.e_mean = -cfg.omega0 * out.atom.u + kappa * drive * out.atom.w;
    for (std::size_t n = 0; n < m; ++n) out.e_mean += cfg.modes[n].rabi * out.modes[n][kWp];
    // E^2 = w0^2 + K^2 with K = kappa Omega + sum_n Omega_n q_n
    std::vector<cplx> kpsi(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        cplx acc = kappa * drive * psi[j];
        for (std::size_t n = 0; n < m; ++n) acc += cfg.modes[n].rabi * q[n][j];
        kpsi[j] = acc;
    }
    out.e2_mean = cfg.omega0 * cfg.omega0 * out.norm * out.norm + inner(kpsi, kpsi).real();
    return out;
}

ExactMoments extract_moments(const FockState& state, const FockConfig& cfg) {
    return extract_moments(state, FockHamiltonian(cfg));
}

double energy(const FockState& state, const FockHamiltonian& h) {
    std::vector<cplx> hpsi(h.dim());
    h.apply(state.t, state.amplitudes, hpsi);
    return inner(state.amplitudes, hpsi).real();
}

// ---------------------------------------------------------------------------

std::string CompareReport::appendix_verdict() const {
    if (probe_corrected < probe_literal) return "corrected";
    if (probe_literal < probe_corrected) return "literal";
    return "tie";
}

std::vector<double> exact_derivatives(const FockState& state, const FockConfig& cfg, double h) {
    FockConfig fine = cfg;
    fine.dt = h / 4.0;
    fine.sample_every = 1;
    const FockHamiltonian ham(fine);
    const FockState forward = propagate(state, fine, state.t + h);
    const FockState backward = propagate(state, fine, state.t - h);
    const auto plus = extract_moments(forward, ham).as_hierarchy(forward.t);
    const auto minus = extract_moments(backward, ham).as_hierarchy(backward.t);
    std::vector<double> out(plus.values().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (plus.values()[i] - minus.values()[i]) / (2.0 * h);
    return out;
}

FockState probe_state(const FockConfig& cfg, double t) {
    std::vector<std::vector<cplx>> modes;
    for (std::size_t n = 0; n < cfg.modes.size(); ++n) {
        modes.push_back(coherent_amplitudes(std::polar(0.3, static_cast<double>(n + 1)), cfg.fock_cutoff));
    }
    // Bloch vector tilted 1 rad from the pole, azimuth 0.7 rad
    FockState s = product_state(cfg, std::cos(0.5), std::polar(std::sin(0.5), 0.7), modes);
    const double norm = s.norm();
    for (auto& a : s.amplitudes) a /= norm;
    s.t = t;
    return s;
}

double probe_deviation(const SystemConfig& config, const HierarchyOptions& options, std::size_t fock_cutoff,
                       double t_probe) {
    const FockConfig fock = fock_config_from(config, fock_cutoff, DriveConvention::appendix_consistent);
    const FockState probe = probe_state(fock, t_probe);
    const auto exact = exact_derivatives(probe, fock);
    const HierarchyModel model(config, options);
    const auto rhs = model.rhs(extract_moments(probe, fock).as_hierarchy(t_probe));
    double worst = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) worst = std::max(worst, std::abs(rhs[i] - exact[i]));
    return worst;
}

std::string CompareReport::e2_verdict() const {
    if (l2_e2_operator < l2_e2_paper) return "operator";
    if (l2_e2_paper < l2_e2_operator) return "paper";
    return "tie";
}

namespace {

const char* const kModeFieldNames[kModeVars] = {"N", "Up", "Um", "Vp", "Vm", "Wp", "Wm", "X", "Y", "X2", "Y2"};

std::vector<double> tracked_row(const HierarchyState& s) {
    std::vector<double> row(s.values().begin(), s.values().end());
    for (std::size_t n = 0; n < s.mode_count(); ++n) {
        const auto e = ellipse(moments_of(s.mode(n)));
        row.push_back(e.lambda_plus);
        row.push_back(e.lambda_minus);
    }
    return row;
}

std::vector<HierarchyState> run_hierarchy(const SystemConfig& config, bool literal) {
    std::vector<HierarchyState> out;
    HierarchyModel model(config, HierarchyOptions{literal});
    integrate(initial_state(config), model, [&out](const HierarchyState& s) { out.push_back(s); });
    return out;
}

}  // namespace

CompareReport compare_hierarchy(const SystemConfig& config, const CompareOptions& options) {
    validate(config);
    const FockConfig fock = fock_config_from(config, options.fock_cutoff, DriveConvention::appendix_consistent);
    const FockHamiltonian h(fock);
    const std::size_t m = fock.modes.size();

    std::vector<ExactMoments> exact;
    std::vector<double> exact_times;
    propagate(ground_vacuum(fock), fock, config.t_end, [&](const FockState& s) {
        exact.push_back(extract_moments(s, h));
        exact_times.push_back(s.t);
    });

    const auto corrected = run_hierarchy(config, false);
    const auto literal = run_hierarchy(config, true);
    if (corrected.size() != exact.size()) {
        throw std::logic_error("compare_hierarchy: hierarchy and oracle sample grids differ");
    }

    CompareReport report;
    report.names = {"U", "V", "W"};
    for (std::size_t n = 0; n < m; ++n) {
        for (const char* f : kModeFieldNames) report.names.push_back(std::string(f) + "_" + std::to_string(n));
    }
    for (std::size_t n = 0; n < m; ++n) {
        report.names.push_back("lambda_plus_" + std::to_string(n));
        report.names.push_back("lambda_minus_" + std::to_string(n));
    }
    const std::size_t tracked = state_size(m);
    report.summary.resize(report.names.size());
    for (std::size_t i = 0; i < report.names.size(); ++i) report.summary[i].name = report.names[i];

    bool small = true;
    double sq_corr = 0.0, sq_lit = 0.0, sq_e2_op = 0.0, sq_e2_paper = 0.0;
    for (std::size_t k = 0; k < exact.size(); ++k) {
        const auto& ex = exact[k];
        const HierarchyState exact_state = ex.as_hierarchy(exact_times[k]);
        const auto ref = tracked_row(exact_state);
        const auto hier = tracked_row(corrected[k]);
        const auto lit = tracked_row(literal[k]);

        std::vector<double> dev(ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i) {
            dev[i] = hier[i] - ref[i];
            auto& s = report.summary[i];
            s.max_abs = std::max(s.max_abs, std::abs(dev[i]));
            s.rms += dev[i] * dev[i];
        }
        for (std::size_t i = 0; i < tracked; ++i) {
            sq_corr += dev[i] * dev[i];
            sq_lit += (lit[i] - ref[i]) * (lit[i] - ref[i]);
        }

        for (std::size_t n = 0; n < m && small; ++n) small = ex.modes[n][kN] <= options.photon_threshold;
        if (small) {
            ++report.small_photon_samples;
            for (std::size_t n = 0; n < m; ++n) {
                report.max_dn_small = std::max(report.max_dn_small, std::abs(dev[mode_offset(n) + kN]));
                report.max_dlambda_small = std::max({report.max_dlambda_small, std::abs(dev[tracked + 2 * n]),
                                                     std::abs(dev[tracked + 2 * n + 1])});
            }
        }

        std::vector<ModeMoments> mm;
        for (std::size_t n = 0; n < m; ++n) mm.push_back(moments_of(ex.modes[n]));
        const double drive = drive_value(config.drive, exact_times[k]);
        const double e2_op =
            e_second_moment(config.omega0, drive, fock.modes, mm, SecondMomentMode::OperatorConsistent);
        const double e2_paper = e_second_moment(config.omega0, drive, fock.modes, mm, SecondMomentMode::PaperLiteral);
        sq_e2_op += (e2_op - ex.e2_mean) * (e2_op - ex.e2_mean);
        sq_e2_paper += (e2_paper - ex.e2_mean) * (e2_paper - ex.e2_mean);

        report.times.push_back(exact_times[k]);
        report.deviation.push_back(std::move(dev));
        report.cross_correlation.push_back(ex.max_cross_correlation());
    }
    const double count = static_cast<double>(exact.size());
    for (auto& s : report.summary) s.rms = std::sqrt(s.rms / count);
    report.l2_corrected = std::sqrt(sq_corr / count);
    report.l2_literal = std::sqrt(sq_lit / count);
    report.l2_e2_operator = std::sqrt(sq_e2_op / count);
    report.l2_e2_paper = std::sqrt(sq_e2_paper / count);

    const double t_probe = std::min(0.5 * config.drive.duration, config.t_end);
    report.probe_corrected = probe_deviation(config, HierarchyOptions{false}, options.fock_cutoff, t_probe);
    report.probe_literal = probe_deviation(config, HierarchyOptions{true}, options.fock_cutoff, t_probe);
    return report;
}

}  // namespace hhgq
