#include "ccyopt/simulators.hpp"

#include <cmath>
#include <complex>

#include "ccyopt/parallel.hpp"

namespace ccyopt {

using Complex = std::complex<double>;

Matrix Simulator::evaluate_batch(const Matrix& xp) const {
  const int d1 = design_dim();
  const int d2 = noise_dim();
  if (xp.cols() != d1 + d2) throw std::invalid_argument("evaluate_batch: column count mismatch");
  Matrix out(xp.rows(), static_cast<Index>(metric_names().size()));
  parallel_for(xp.rows(), [&](Index i) {
    out.row(i) = evaluate(xp.row(i).head(d1).transpose(), xp.row(i).tail(d2).transpose());
  });
  return out;
}

namespace device {
double ring_fsr_ghz() {
  const double circumference = 2.0 * 3.14159265358979323846 * ring_radius_m;
  return speed_of_light / (ring_n_g * circumference) / 1e9;
}
}  // namespace device

namespace {

// Grid over one FSR with a fixed sub-step offset; an exactly symmetric
// response sampled on a symmetric grid would tie its twin maxima bitwise.
Vector frequency_grid(double fsr_ghz, int n_points) {
  const double step = fsr_ghz / (n_points - 1);
  const double offset = 0.41421356237309515 * step;
  Vector f(n_points);
  for (int i = 0; i < n_points; ++i) f[i] = -0.5 * fsr_ghz + offset + i * step;
  return f;
}

struct Coupler2x2 {
  Complex a11, a12, a21, a22;
};

void check_finite(const SpectralResponse& response, const char* what) {
  if (!response.through.allFinite() || !response.drop.allFinite()) {
    throw SimulationError(std::string(what) + ": non-finite spectral response");
  }
}

Vector to_db(const Vector& linear) {
  Vector db(linear.size());
  for (Index i = 0; i < linear.size(); ++i) {
    db[i] = 10.0 * std::log10(std::max(linear[i], 1e-300));
  }
  return db;
}

struct Peak {
  Index index;      // representative sample of the peak plateau
  double value_db;
  bool full_span;   // the plateau covers the whole grid (flat response)
};

const Vector& port_values(const SpectralResponse& response, Port port) {
  return port == Port::through ? response.through : response.drop;
}

Peak find_peak(const Vector& linear, const Vector& db) {
  const Index n = linear.size();
  const double peak = linear.maxCoeff();
  Index first = -1, last = -1;
  for (Index i = 0; i < n; ++i) {
    if (linear[i] == peak) {
      if (first < 0) first = i;
      last = i;
      continue;
    }
  }
  for (Index i = first; i <= last; ++i) {
    if (linear[i] != peak) {
      throw std::domain_error("spectral peak is not unique (two equal maxima)");
    }
  }
  Peak result;
  result.full_span = (first == 0 && last == n - 1);
  if (!result.full_span && (first == 0 || last == n - 1)) {
    throw std::domain_error("spectral peak at grid boundary; grid must be centered on the passband");
  }
  result.index = (first + last) / 2;
  result.value_db = db[result.index];
  return result;
}

struct Passband {
  double lo_ghz, hi_ghz;
  Index lo_index, hi_index;  // samples inside the band
};

Passband find_passband(const Vector& frequency, const Vector& db, const Peak& peak) {
  const Index n = db.size();
  const double threshold = peak.value_db - 3.0;
  Passband band;
  Index i = peak.index;
  while (i > 0 && db[i - 1] >= threshold) --i;
  if (i == 0) {
    band.lo_ghz = frequency[0];
  } else {
    band.lo_ghz = frequency[i - 1] +
                  (frequency[i] - frequency[i - 1]) * (threshold - db[i - 1]) / (db[i] - db[i - 1]);
  }
  band.lo_index = i;
  i = peak.index;
  while (i < n - 1 && db[i + 1] >= threshold) ++i;
  if (i == n - 1) {
    band.hi_ghz = frequency[n - 1];
  } else {
    band.hi_ghz = frequency[i] +
                  (frequency[i + 1] - frequency[i]) * (threshold - db[i]) / (db[i + 1] - db[i]);
  }
  band.hi_index = i;
  return band;
}

double stopband_max_db(const Vector& frequency, const Vector& db, double peak_freq) {
  const double span = frequency[frequency.size() - 1] - frequency[0];
  double max_db = -std::numeric_limits<double>::infinity();
  Index count = 0;
  for (Index i = 0; i < frequency.size(); ++i) {
    if (std::abs(frequency[i] - peak_freq) >= span / 4.0) {
      max_db = std::max(max_db, db[i]);
      ++count;
    }
  }
  if (count == 0) throw std::domain_error("empty stopband");
  return max_db;
}

}  // namespace

SpectralResponse microring_response(const Vector& couplings, int n_points) {
  if (couplings.size() != 4) throw std::invalid_argument("microring_response: four couplers required");
  SpectralResponse response;
  response.frequency = frequency_grid(device::ring_fsr_ghz(), n_points);
  response.through.resize(n_points);
  response.drop.resize(n_points);

  Coupler2x2 k[4];
  for (int j = 0; j < 4; ++j) {
    const double kappa = couplings[j];
    const double t = std::sqrt(1.0 - kappa * kappa);
    const Complex inv(0.0, -1.0 / kappa);  // 1/(i*kappa)
    k[j] = {inv * Complex(-1.0), inv * Complex(t), inv * Complex(-t), inv * Complex(1.0)};
  }

  const double fsr = device::ring_fsr_ghz();
  for (int i = 0; i < n_points; ++i) {
    const double theta = 2.0 * 3.14159265358979323846 * response.frequency[i] / fsr;
    const Complex h = std::polar(1.0, theta / 2.0);
    // cascade K3 P K2 P K1 P K0 with P = diag(h, 1/h)
    Complex m11 = k[0].a11, m12 = k[0].a12, m21 = k[0].a21, m22 = k[0].a22;
    for (int j = 1; j < 4; ++j) {
      const Complex p11 = h * m11, p12 = h * m12;
      const Complex p21 = m21 / h, p22 = m22 / h;
      const Complex n11 = k[j].a11 * p11 + k[j].a12 * p21;
      const Complex n12 = k[j].a11 * p12 + k[j].a12 * p22;
      const Complex n21 = k[j].a21 * p11 + k[j].a22 * p21;
      const Complex n22 = k[j].a21 * p12 + k[j].a22 * p22;
      m11 = n11;
      m12 = n12;
      m21 = n21;
      m22 = n22;
    }
    const Complex through = -m21 / m22;
    const Complex drop = m11 + m12 * through;
    response.through[i] = std::norm(through);
    response.drop[i] = std::norm(drop);
  }
  check_finite(response, "microring_response");
  return response;
}

SpectralResponse mzi_response(const Vector& couplings, int n_points) {
  if (couplings.size() != 3) throw std::invalid_argument("mzi_response: three couplers required");
  SpectralResponse response;
  response.frequency = frequency_grid(device::mzi_fsr_ghz, n_points);
  response.through.resize(n_points);
  response.drop.resize(n_points);

  double t[3];
  for (int j = 0; j < 3; ++j) t[j] = std::sqrt(1.0 - couplings[j] * couplings[j]);

  for (int i = 0; i < n_points; ++i) {
    const double phase = 2.0 * 3.14159265358979323846 * response.frequency[i] / device::mzi_fsr_ghz;
    const Complex d = std::polar(1.0, phase);
    Complex v1(t[0], 0.0), v2(0.0, couplings[0]);  // C(k1) * [1, 0]
    for (int j = 1; j < 3; ++j) {
      const Complex w1 = d * v1;  // arm delay on the upper path
      const Complex n1 = t[j] * w1 + Complex(0.0, couplings[j]) * v2;
      const Complex n2 = Complex(0.0, couplings[j]) * w1 + t[j] * v2;
      v1 = n1;
      v2 = n2;
    }
    response.through[i] = std::norm(v1);  // bar port
    response.drop[i] = std::norm(v2);     // cross port
  }
  check_finite(response, "mzi_response");
  return response;
}

double bandwidth_3db(const SpectralResponse& response, Port port) {
  const Vector& linear = port_values(response, port);
  const Vector db = to_db(linear);
  const Peak peak = find_peak(linear, db);
  if (peak.full_span) {
    return response.frequency[response.frequency.size() - 1] - response.frequency[0];
  }
  const Passband band = find_passband(response.frequency, db, peak);
  return band.hi_ghz - band.lo_ghz;
}

double extinction_ratio(const SpectralResponse& response) {
  const Vector db = to_db(response.drop);
  const Peak peak = find_peak(response.drop, db);
  return peak.value_db - stopband_max_db(response.frequency, db, response.frequency[peak.index]);
}

double passband_roughness(const SpectralResponse& response) {
  const Vector db = to_db(response.drop);
  const Peak peak = find_peak(response.drop, db);
  Index lo = 0, hi = db.size() - 1;
  if (!peak.full_span) {
    const Passband band = find_passband(response.frequency, db, peak);
    lo = band.lo_index;
    hi = band.hi_index;
  }
  const Index count = hi - lo + 1;
  if (count < 1) throw std::domain_error("empty passband");
  const auto segment = db.segment(lo, count);
  const double mean = segment.mean();
  return std::sqrt((segment.array() - mean).square().sum() / static_cast<double>(count));
}

double crosstalk(const SpectralResponse& response) {
  const Vector db = to_db(response.drop);
  const Peak peak = find_peak(response.drop, db);
  return stopband_max_db(response.frequency, db, response.frequency[peak.index]);
}

double attenuation(const SpectralResponse& response) {
  const Vector db = to_db(response.drop);
  const Peak peak = find_peak(response.drop, db);
  return -peak.value_db;
}

namespace {

class SyntheticSimulator final : public Simulator {
 public:
  std::string name() const override { return "synthetic"; }
  int design_dim() const override { return 2; }
  int noise_dim() const override { return 2; }
  std::vector<std::string> metric_names() const override { return {"objective", "g1", "g2"}; }
  Vector evaluate(const Vector& x, const Vector& xi) const override {
    const double a = x[0] + xi[0];
    const double b = x[1] + xi[1];
    Vector metrics(3);
    metrics[0] = 3.0 * a + b;
    metrics[1] = a * a - b;
    metrics[2] = a * a + b;
    return metrics;
  }
};

class MicroringSimulator final : public Simulator {
 public:
  explicit MicroringSimulator(int n_points) : n_points_(n_points) {}
  std::string name() const override { return "microring"; }
  int design_dim() const override { return 4; }
  int noise_dim() const override { return 4; }
  std::vector<std::string> metric_names() const override { return {"bandwidth", "extinction_ratio", "roughness"}; }
  Vector evaluate(const Vector& x, const Vector& xi) const override {
    Vector kappa = (x + xi).cwiseMax(1e-3).cwiseMin(1.0 - 1e-3);
    const SpectralResponse response = microring_response(kappa, n_points_);
    Vector metrics(3);
    metrics[0] = bandwidth_3db(response, Port::drop);
    metrics[1] = extinction_ratio(response);
    metrics[2] = passband_roughness(response);
    return metrics;
  }

 private:
  int n_points_;
};

class MziSimulator final : public Simulator {
 public:
  explicit MziSimulator(int n_points) : n_points_(n_points) {}
  std::string name() const override { return "mzi"; }
  int design_dim() const override { return 3; }
  int noise_dim() const override { return 3; }
  std::vector<std::string> metric_names() const override { return {"bandwidth", "crosstalk", "attenuation"}; }
  Vector evaluate(const Vector& x, const Vector& xi) const override {
    const Vector gaps = (x + xi).cwiseMax(10.0).cwiseMin(600.0);
    Vector kappa(3);
    for (int i = 0; i < 3; ++i) kappa[i] = std::exp(-gaps[i] / device::mzi_gap_decay_nm);
    const SpectralResponse response = mzi_response(kappa, n_points_);
    Vector metrics(3);
    metrics[0] = bandwidth_3db(response, Port::drop);
    metrics[1] = crosstalk(response);
    metrics[2] = attenuation(response);
    return metrics;
  }

 private:
  int n_points_;
};

}  // namespace

std::unique_ptr<Simulator> make_synthetic() { return std::make_unique<SyntheticSimulator>(); }
std::unique_ptr<Simulator> make_microring(int n_points) {
  return std::make_unique<MicroringSimulator>(n_points);
}
std::unique_ptr<Simulator> make_mzi(int n_points) {
  return std::make_unique<MziSimulator>(n_points);
}

std::unique_ptr<Simulator> make_builtin(const std::string& name) {
  if (name == "synthetic") return make_synthetic();
  if (name == "microring") return make_microring();
  if (name == "mzi") return make_mzi();
  return nullptr;
}

}  // namespace ccyopt
