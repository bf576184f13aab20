#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "dmi/dynamics.hpp"

namespace dmi
{

struct KSConfig
{
    double theta = 1.0;
    double domain_length = 100.0;
    std::size_t grid_points = 200;
    double dt = 0.1;
    double dt_samp = 0.1; // step() advances by this; must be a multiple of dt
};

/// Parameterized Kuramoto-Sivashinsky equation
///     u_t = -theta (u_xx + u_xxxx) - u u_x
/// on a periodic domain, advanced with ETDRK4 in Fourier space.
///
/// The linear symbol L(k) = theta (k^2 - k^4) is integrated exactly. The
/// phi-function coefficients are averaged over 32 points on the unit circle
/// around each L(k) dt. The nonlinear term -(1/2) d/dx (u^2) is a
/// pseudo-spectral product with 2/3-rule dealiasing.
///
/// step() is serialized by an internal mutex; use one instance per thread
/// for concurrent stepping.
class KSModel final : public DynamicalModel
{
public:
    explicit KSModel(const KSConfig& config);
    ~KSModel() override;

    KSModel(const KSModel&) = delete;
    KSModel& operator=(const KSModel&) = delete;

    std::size_t state_dim() const override { return cfg_.grid_points; }
    std::vector<double> params() const override { return {cfg_.theta}; }
    std::string name() const override { return "ks"; }

    const KSConfig& config() const { return cfg_; }
    std::size_t substeps() const { return n_sub_; }

    /// Grid x_j = j L / N, j = 0..N-1.
    std::vector<double> grid() const;
    const std::vector<double>& wavenumbers() const { return k_; }

    /// L(k) = theta (k^2 - k^4).
    double linear_symbol(double k) const;

    /// One ETDRK4 step of size dt.
    State etd_step(std::span<const double> u) const;

    /// Largest |Im| / ||u||_inf seen after an inverse transform since construction.
    double max_imag_residue() const;

protected:
    void advance(std::span<const double> x, std::span<double> out) const override;

private:
    struct Fft;

    void forward(std::span<const double> u, std::vector<std::complex<double>>& v) const;
    void inverse(const std::vector<std::complex<double>>& v, std::span<double> u) const;
    void nonlinear(const std::vector<std::complex<double>>& v, std::vector<std::complex<double>>& out) const;
    void etdrk4(std::vector<std::complex<double>>& v) const;

    KSConfig cfg_;
    std::size_t n_sub_;
    std::vector<double> k_;
    std::vector<std::complex<double>> deriv_; // -i k / 2 with dealiasing mask
    std::vector<double> e_, e2_, q_, f1_, f2_, f3_;

    std::unique_ptr<Fft> fft_;
    mutable std::mutex mutex_;
    mutable std::vector<std::complex<double>> nv_, na_, nb_, nc_, a_, b_, c_, tmp_;
    mutable std::vector<double> phys_;
    mutable double max_residue_ = 0.0;
};

/// One ETD step of model.config().dt.
State ks_step(const KSModel& model, std::span<const double> u);

/// u0(x) = sin(2 pi x / L) on the model grid (sin(pi x / 50) for L = 100).
State ks_default_initial(const KSModel& model);

} // namespace dmi
