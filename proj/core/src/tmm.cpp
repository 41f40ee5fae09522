#include "rdc/tmm.hpp"

#include <cmath>
#include <numbers>

#include "rdc/errors.hpp"

namespace rdc {

namespace {

constexpr Complex kI{0.0, 1.0};

double wavenumber(double wavelength_nm) { return 2.0 * std::numbers::pi / wavelength_nm; }

// Ratio used in the p-polarised Fresnel numerator: eps = n^2.
Complex permittivity(Complex n) { return n * n; }

}  // namespace

Stack::Stack(Material below, std::vector<Layer> layers, Material above)
    : below_(std::move(below)), layers_(std::move(layers)), above_(std::move(above)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const double d = layers_[i].thickness_nm;
    if (!std::isfinite(d) || d <= 0.0) {
      throw ValidationError("layer " + std::to_string(i) + " (" + layers_[i].material.name() + ")",
                            "thickness must be finite and positive");
    }
  }
}

double Stack::total_thickness_nm() const noexcept {
  double sum = 0.0;
  for (const auto& l : layers_) sum += l.thickness_nm;
  return sum;
}

Stack Stack::flipped() const {
  return Stack(above_, std::vector<Layer>(layers_.rbegin(), layers_.rend()), below_);
}

Complex axial_wavenumber(Complex index, Complex q) {
  Complex kz = std::sqrt(index * index - q * q);
  if (kz.imag() < 0.0 || (kz.imag() == 0.0 && kz.real() < 0.0)) kz = -kz;
  return kz;
}

Complex axial_wavenumber(Complex index, double u, double k0, double n_ref) {
  return k0 * axial_wavenumber(index, Complex(n_ref * u, 0.0));
}

InterfaceCoefficients fresnel(Polarization pol, Complex n1, Complex n2, Complex q) {
  const Complex kz1 = axial_wavenumber(n1, q);
  const Complex kz2 = axial_wavenumber(n2, q);
  Complex r;
  if (pol == Polarization::s) {
    r = (kz1 - kz2) / (kz1 + kz2);
  } else {
    const Complex a = permittivity(n2) * kz1;
    const Complex b = permittivity(n1) * kz2;
    r = (a - b) / (a + b);
  }
  return {r, 1.0 + r};
}

InterfaceCoefficients fresnel(Polarization pol, Complex n1, Complex n2, double u, double n_ref) {
  return fresnel(pol, n1, n2, Complex(n_ref * u, 0.0));
}

InterfaceCoefficients multilayer_rt(std::span<const Medium> media, Polarization pol, double k0, Complex q) {
  const std::size_t m = media.size();
  if (m < 2) throw ValidationError("media", "need at least an incidence and an exit medium");

  // Walk upward from the exit medium. gamma is the up/down amplitude ratio at
  // the top of medium j+1; the exit medium carries no upgoing wave.
  Complex gamma = 0.0;
  Complex t = 1.0;
  Complex rho = 0.0;
  for (std::size_t jj = m - 1; jj-- > 0;) {
    const auto [r, tj] = fresnel(pol, media[jj].index, media[jj + 1].index, q);
    const Complex denom = 1.0 + r * gamma;
    rho = (r + gamma) / denom;
    t *= tj / denom;
    if (jj > 0) {
      const Complex phase = std::exp(kI * axial_wavenumber(media[jj].index, q) * k0 * media[jj].thickness_nm);
      gamma = rho * phase * phase;
      t *= phase;
    }
  }
  return {rho, t};
}

std::vector<Medium> media_from_above(const Stack& stack, double wavelength_nm) {
  std::vector<Medium> media;
  media.reserve(stack.size() + 2);
  media.push_back({stack.above().index(wavelength_nm), 0.0});
  for (auto it = stack.layers().rbegin(); it != stack.layers().rend(); ++it) {
    media.push_back({it->material.index(wavelength_nm), it->thickness_nm});
  }
  media.push_back({stack.below().index(wavelength_nm), 0.0});
  return media;
}

PlaneWaveResult stack_rt(const Stack& stack, Polarization pol, double wavelength_nm, double u, double n_ref) {
  const auto media = media_from_above(stack, wavelength_nm);
  const Complex q(n_ref * u, 0.0);
  const auto [r, t] = multilayer_rt(media, pol, wavenumber(wavelength_nm), q);

  const Complex n_in = media.front().index;
  const Complex n_out = media.back().index;
  const Complex kz_in = axial_wavenumber(n_in, q);
  const Complex kz_out = axial_wavenumber(n_out, q);
  double flux_in, flux_out;
  if (pol == Polarization::s) {
    flux_in = kz_in.real();
    flux_out = kz_out.real();
  } else {
    flux_in = (kz_in / permittivity(n_in)).real();
    flux_out = (kz_out / permittivity(n_out)).real();
  }
  PlaneWaveResult res{r, t, std::norm(r), 0.0, 0.0};
  if (flux_in > 0.0) res.T = std::norm(t) * flux_out / flux_in;
  res.A = 1.0 - res.R - res.T;
  return res;
}

PlaneWaveResult stack_rt(const Stack& stack, Polarization pol, double wavelength_nm, double u) {
  return stack_rt(stack, pol, wavelength_nm, u, stack.above().index(wavelength_nm).real());
}

FieldSample field_profile(const Stack& stack, Polarization pol, double wavelength_nm, double u, double z_nm) {
  const auto media = media_from_above(stack, wavelength_nm);
  const std::size_t m = media.size();
  const double k0 = wavenumber(wavelength_nm);
  const Complex q(stack.above().index(wavelength_nm).real() * u, 0.0);

  std::vector<Complex> kz(m);
  for (std::size_t j = 0; j < m; ++j) kz[j] = axial_wavenumber(media[j].index, q);

  // rho[j]: up/down ratio at the bottom of medium j. top[j]: same at its top.
  std::vector<Complex> rho(m, 0.0), top(m, 0.0), interface_r(m, 0.0), interface_t(m, 0.0);
  for (std::size_t jj = m - 1; jj-- > 0;) {
    const auto [r, t] = fresnel(pol, media[jj].index, media[jj + 1].index, q);
    interface_r[jj] = r;
    interface_t[jj] = t;
    rho[jj] = (r + top[jj + 1]) / (1.0 + r * top[jj + 1]);
    top[jj] = jj == 0 ? rho[jj] : rho[jj] * std::exp(2.0 * kI * kz[jj] * k0 * media[jj].thickness_nm);
  }

  // Locate z and carry the downgoing amplitude (referenced to the top of each medium).
  std::size_t j = 0;
  double local = z_nm;
  Complex down_top = 1.0;
  if (z_nm >= 0.0) {
    double boundary = 0.0;
    j = 1;
    down_top = interface_t[0] / (1.0 + interface_r[0] * top[1]);
    while (j < m - 1 && z_nm > boundary + media[j].thickness_nm) {
      const Complex phase = std::exp(kI * kz[j] * k0 * media[j].thickness_nm);
      down_top *= phase * interface_t[j] / (1.0 + interface_r[j] * top[j + 1]);
      boundary += media[j].thickness_nm;
      ++j;
    }
    local = z_nm - boundary;
  }

  Complex down = down_top * std::exp(kI * kz[j] * k0 * local);
  Complex up = 0.0;
  if (j == 0) {
    up = rho[0] * std::exp(-kI * kz[0] * k0 * local);
  } else if (j < m - 1) {
    up = down_top * rho[j] * std::exp(kI * kz[j] * k0 * (2.0 * media[j].thickness_nm - local));
  }

  FieldSample s{};
  if (pol == Polarization::s) {
    s.tangential_e = down + up;
    s.tangential_h = kz[j] * (down - up);
    s.intensity = std::norm(s.tangential_e);
  } else {
    const Complex eps = permittivity(media[j].index);
    const Complex ex = -kz[j] / eps * (down - up);
    const Complex ez = -q / eps * (down + up);
    const Complex eps0 = permittivity(media[0].index);
    const double incident = std::norm(kz[0] / eps0) + std::norm(q / eps0);
    const double scale = 1.0 / std::sqrt(incident);
    s.tangential_h = (down + up) * scale;
    s.tangential_e = ex * scale;
    s.intensity = (std::norm(ex) + std::norm(ez)) / incident;
  }
  return s;
}

}  // namespace rdc
