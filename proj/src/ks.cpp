#include "dmi/ks.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dmi
{

namespace
{
// FFTW planning is not thread-safe.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

constexpr std::size_t contour_points = 32;
} // namespace

struct KSModel::Fft
{
    std::size_t n;
    fftw_complex* in;
    fftw_complex* out;
    fftw_plan fwd;
    fftw_plan bwd;

    explicit Fft(std::size_t size) : n(size)
    {
        std::lock_guard lock(planner_mutex());
        in = fftw_alloc_complex(n);
        out = fftw_alloc_complex(n);
        fwd = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    ~Fft()
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(in);
        fftw_free(out);
    }

    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
};

KSModel::KSModel(const KSConfig& config) : cfg_(config)
{
    if (!(cfg_.dt > 0.0) || !(cfg_.domain_length > 0.0) || cfg_.grid_points < 4) {
        throw ParameterError("KSModel: need dt > 0, domain_length > 0 and grid_points >= 4");
    }
    if (!std::isfinite(cfg_.theta)) {
        throw ParameterError("KSModel: theta must be finite");
    }
    const double ratio = cfg_.dt_samp / cfg_.dt;
    const double rounded = std::round(ratio);
    if (!(rounded >= 1.0) || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
        throw ParameterError("KSModel: dt_samp must be a positive integer multiple of dt");
    }
    n_sub_ = static_cast<std::size_t>(rounded);

    const std::size_t n = cfg_.grid_points;
    const double h = cfg_.dt;
    const double base = 2.0 * std::numbers::pi / cfg_.domain_length;
    const std::size_t keep = n / 3; // |j| <= n/3 survives dealiasing

    k_.resize(n);
    deriv_.resize(n);
    e_.resize(n);
    e2_.resize(n);
    q_.resize(n);
    f1_.resize(n);
    f2_.resize(n);
    f3_.resize(n);

    for (std::size_t j = 0; j < n; ++j) {
        long idx = static_cast<long>(j);
        if (2 * j > n) {
            idx -= static_cast<long>(n);
        }
        const bool nyquist = (2 * j == n);
        k_[j] = nyquist ? 0.0 : base * static_cast<double>(idx);
        const bool alive = static_cast<std::size_t>(std::labs(idx)) <= keep && !nyquist;
        deriv_[j] = alive ? std::complex<double>(0.0, -0.5 * k_[j]) : std::complex<double>(0.0, 0.0);

        // Nyquist mode keeps its true wavenumber in the linear part.
        const double kl = nyquist ? base * static_cast<double>(n / 2) : k_[j];
        const double lin = linear_symbol(kl);
        e_[j] = std::exp(h * lin);
        e2_[j] = std::exp(0.5 * h * lin);

        std::complex<double> sq{}, s1{}, s2{}, s3{};
        for (std::size_t p = 0; p < contour_points; ++p) {
            const double ang = 2.0 * std::numbers::pi * (static_cast<double>(p) + 0.5) / contour_points;
            const std::complex<double> r = h * lin + std::polar(1.0, ang);
            const std::complex<double> er = std::exp(r);
            const std::complex<double> r3 = r * r * r;
            sq += (std::exp(0.5 * r) - 1.0) / r;
            s1 += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
            s2 += (2.0 + r + er * (-2.0 + r)) / r3;
            s3 += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
        }
        const double inv = 1.0 / static_cast<double>(contour_points);
        q_[j] = h * (sq * inv).real();
        f1_[j] = h * (s1 * inv).real();
        f2_[j] = h * (s2 * inv).real();
        f3_[j] = h * (s3 * inv).real();
    }

    fft_ = std::make_unique<Fft>(n);
    for (auto* buf : {&nv_, &na_, &nb_, &nc_, &a_, &b_, &c_, &tmp_}) {
        buf->assign(n, {});
    }
    phys_.assign(n, 0.0);
}

KSModel::~KSModel() = default;

std::vector<double> KSModel::grid() const
{
    std::vector<double> x(cfg_.grid_points);
    const double dx = cfg_.domain_length / static_cast<double>(cfg_.grid_points);
    for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] = dx * static_cast<double>(j);
    }
    return x;
}

double KSModel::linear_symbol(double k) const
{
    const double k2 = k * k;
    return cfg_.theta * (k2 - k2 * k2);
}

void KSModel::forward(std::span<const double> u, std::vector<std::complex<double>>& v) const
{
    const std::size_t n = cfg_.grid_points;
    for (std::size_t j = 0; j < n; ++j) {
        fft_->in[j][0] = u[j];
        fft_->in[j][1] = 0.0;
    }
    fftw_execute(fft_->fwd);
    for (std::size_t j = 0; j < n; ++j) {
        v[j] = {fft_->out[j][0], fft_->out[j][1]};
    }
}

void KSModel::inverse(const std::vector<std::complex<double>>& v, std::span<double> u) const
{
    const std::size_t n = cfg_.grid_points;
    for (std::size_t j = 0; j < n; ++j) {
        fft_->in[j][0] = v[j].real();
        fft_->in[j][1] = v[j].imag();
    }
    fftw_execute(fft_->bwd);
    const double scale = 1.0 / static_cast<double>(n);
    double umax = 0.0;
    double imax = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        u[j] = fft_->out[j][0] * scale;
        umax = std::max(umax, std::abs(u[j]));
        imax = std::max(imax, std::abs(fft_->out[j][1] * scale));
    }
    if (umax > 0.0) {
        max_residue_ = std::max(max_residue_, imax / umax);
    } else if (imax > 0.0) {
        max_residue_ = std::max(max_residue_, imax);
    }
}

void KSModel::nonlinear(const std::vector<std::complex<double>>& v, std::vector<std::complex<double>>& out) const
{
    inverse(v, phys_);
    for (double& x : phys_) {
        x *= x;
    }
    forward(phys_, out);
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] *= deriv_[j];
    }
}

void KSModel::etdrk4(std::vector<std::complex<double>>& v) const
{
    const std::size_t n = cfg_.grid_points;
    nonlinear(v, nv_);
    for (std::size_t j = 0; j < n; ++j) {
        a_[j] = e2_[j] * v[j] + q_[j] * nv_[j];
    }
    nonlinear(a_, na_);
    for (std::size_t j = 0; j < n; ++j) {
        b_[j] = e2_[j] * v[j] + q_[j] * na_[j];
    }
    nonlinear(b_, nb_);
    for (std::size_t j = 0; j < n; ++j) {
        c_[j] = e2_[j] * a_[j] + q_[j] * (2.0 * nb_[j] - nv_[j]);
    }
    nonlinear(c_, nc_);
    bool finite = true;
    for (std::size_t j = 0; j < n; ++j) {
        v[j] = e_[j] * v[j] + nv_[j] * f1_[j] + 2.0 * (na_[j] + nb_[j]) * f2_[j] + nc_[j] * f3_[j];
        finite = finite && std::isfinite(v[j].real()) && std::isfinite(v[j].imag());
    }
    if (!finite) {
        throw InstabilityError(cfg_.theta, cfg_.dt);
    }
}

State KSModel::etd_step(std::span<const double> u) const
{
    if (u.size() != cfg_.grid_points) {
        throw ParameterError("ks_step: field length does not match grid_points");
    }
    if (!all_finite(u)) {
        throw ParameterError("ks_step: non-finite input field");
    }
    std::lock_guard lock(mutex_);
    forward(u, tmp_);
    etdrk4(tmp_);
    State out(u.size());
    inverse(tmp_, out);
    return out;
}

double KSModel::max_imag_residue() const
{
    std::lock_guard lock(mutex_);
    return max_residue_;
}

void KSModel::advance(std::span<const double> x, std::span<double> out) const
{
    std::lock_guard lock(mutex_);
    forward(x, tmp_);
    for (std::size_t s = 0; s < n_sub_; ++s) {
        etdrk4(tmp_);
    }
    inverse(tmp_, out);
}

State ks_step(const KSModel& model, std::span<const double> u)
{
    return model.etd_step(u);
}

State ks_default_initial(const KSModel& model)
{
    const auto x = model.grid();
    const double L = model.config().domain_length;
    State u(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        u[j] = std::sin(2.0 * std::numbers::pi * x[j] / L);
    }
    return u;
}

} // namespace dmi
