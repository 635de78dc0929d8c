#include "hamlag/spectral_field.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <fftw3.h>

#include "hamlag/errors.hpp"

namespace hamlag {

namespace {

// FFTW planning is not thread-safe and plans are bound to buffers, so all
// transforms run through a mutex-guarded cache of (size, sign) plans.
class FftEngine {
 public:
  static FftEngine& instance() {
    static FftEngine e;
    return e;
  }

  // In-place c2c transform of a contiguous buffer interpreted as
  // n0 (x n1) complex values; sign FFTW_FORWARD or FFTW_BACKWARD.
  void transform(std::complex<double>* data, int rank, int n0, int n1, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    const std::size_t total = rank == 1 ? std::size_t(n0) : std::size_t(n0) * n1;
    Key key{rank, n0, n1, sign};
    auto it = plans_.find(key);
    if (it == plans_.end()) {
      if (total > capacity_) {
        // Replanning invalidates existing plans that share the buffer.
        for (auto& kv : plans_) fftw_destroy_plan(kv.second);
        plans_.clear();
        fftw_free(buffer_);
        capacity_ = total * 2;
        buffer_ = fftw_alloc_complex(capacity_);
      }
      fftw_plan p = rank == 1
                        ? fftw_plan_dft_1d(n0, buffer_, buffer_, sign, FFTW_ESTIMATE)
                        : fftw_plan_dft_2d(n0, n1, buffer_, buffer_, sign, FFTW_ESTIMATE);
      it = plans_.emplace(key, p).first;
    }
    auto* buf = reinterpret_cast<std::complex<double>*>(buffer_);
    std::copy(data, data + total, buf);
    fftw_execute(it->second);
    std::copy(buf, buf + total, data);
  }

 private:
  FftEngine() {
    capacity_ = 1 << 14;
    buffer_ = fftw_alloc_complex(capacity_);
  }
  struct Key {
    int rank, n0, n1, sign;
    bool operator<(const Key& o) const {
      return std::tie(rank, n0, n1, sign) < std::tie(o.rank, o.n0, o.n1, o.sign);
    }
  };
  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
  fftw_complex* buffer_ = nullptr;
  std::size_t capacity_ = 0;
};

int wrapIndex(int k, int n) { return ((k % n) + n) % n; }

}  // namespace

SpectralField::SpectralField(int dim, int cutoff) : dim_(dim), cutoff_(cutoff) {
  if (dim != 1 && dim != 2) throw PreconditionError("SpectralField: dim must be 1 or 2");
  if (cutoff < 1) throw PreconditionError("SpectralField: cutoff must be >= 1");
  const int per_axis = 2 * cutoff + 1;
  modes_.assign(dim == 1 ? per_axis : per_axis * per_axis, {0.0, 0.0});
}

int SpectralField::modeIndex(int k1, int k2) const {
  const int n = 2 * cutoff_ + 1;
  if (std::abs(k1) > cutoff_ || std::abs(k2) > cutoff_) {
    throw PreconditionError("SpectralField: wavenumber out of range");
  }
  if (dim_ == 1) return k1 + cutoff_;
  return (k1 + cutoff_) * n + (k2 + cutoff_);
}

SpectralField SpectralField::fromGrid(int dim, int cutoff, const Eigen::ArrayXd& values,
                                      int grid_n) {
  if (grid_n < 2 * cutoff + 1) {
    throw PreconditionError("SpectralField::fromGrid: grid too coarse for cutoff");
  }
  const std::size_t total = dim == 1 ? std::size_t(grid_n) : std::size_t(grid_n) * grid_n;
  if (static_cast<std::size_t>(values.size()) != total) {
    throw PreconditionError("SpectralField::fromGrid: sample count mismatch");
  }
  std::vector<std::complex<double>> buf(total);
  for (std::size_t i = 0; i < total; ++i) buf[i] = values[static_cast<Eigen::Index>(i)];
  FftEngine::instance().transform(buf.data(), dim, grid_n, grid_n, FFTW_FORWARD);

  SpectralField f(dim, cutoff);
  const double scale = 1.0 / static_cast<double>(total);
  if (dim == 1) {
    for (int k = -cutoff; k <= cutoff; ++k) {
      f.modes_[f.modeIndex(k, 0)] = buf[wrapIndex(k, grid_n)] * scale;
    }
  } else {
    for (int k1 = -cutoff; k1 <= cutoff; ++k1) {
      for (int k2 = -cutoff; k2 <= cutoff; ++k2) {
        f.modes_[f.modeIndex(k1, k2)] =
            buf[std::size_t(wrapIndex(k1, grid_n)) * grid_n + wrapIndex(k2, grid_n)] * scale;
      }
    }
  }
  f.symmetrize();
  return f;
}

SpectralField SpectralField::derivative(int axis) const {
  if (axis < 0 || axis >= dim_) throw PreconditionError("SpectralField::derivative: bad axis");
  SpectralField out(dim_, cutoff_);
  const std::complex<double> iu(0.0, 1.0);
  for (int k1 = -cutoff_; k1 <= cutoff_; ++k1) {
    if (dim_ == 1) {
      out.modes_[out.modeIndex(k1, 0)] = iu * double(k1) * modes_[modeIndex(k1, 0)];
    } else {
      for (int k2 = -cutoff_; k2 <= cutoff_; ++k2) {
        const double k = axis == 0 ? k1 : k2;
        out.modes_[out.modeIndex(k1, k2)] = iu * k * modes_[modeIndex(k1, k2)];
      }
    }
  }
  return out;
}

Eigen::ArrayXd SpectralField::sample(int grid_n) const {
  if (grid_n < 2 * cutoff_ + 1) {
    throw PreconditionError("SpectralField::sample: grid too coarse for cutoff");
  }
  const std::size_t total = dim_ == 1 ? std::size_t(grid_n) : std::size_t(grid_n) * grid_n;
  std::vector<std::complex<double>> buf(total, {0.0, 0.0});
  if (dim_ == 1) {
    for (int k = -cutoff_; k <= cutoff_; ++k) buf[wrapIndex(k, grid_n)] = modes_[modeIndex(k, 0)];
  } else {
    for (int k1 = -cutoff_; k1 <= cutoff_; ++k1) {
      for (int k2 = -cutoff_; k2 <= cutoff_; ++k2) {
        buf[std::size_t(wrapIndex(k1, grid_n)) * grid_n + wrapIndex(k2, grid_n)] =
            modes_[modeIndex(k1, k2)];
      }
    }
  }
  FftEngine::instance().transform(buf.data(), dim_, grid_n, grid_n, FFTW_BACKWARD);
  Eigen::ArrayXd out(static_cast<Eigen::Index>(total));
  for (std::size_t i = 0; i < total; ++i) out[static_cast<Eigen::Index>(i)] = buf[i].real();
  return out;
}

double SpectralField::evaluate(const Eigen::VectorXd& theta) const {
  if (theta.size() != dim_) throw PreconditionError("SpectralField::evaluate: bad point");
  std::complex<double> acc(0.0, 0.0);
  for (int k1 = -cutoff_; k1 <= cutoff_; ++k1) {
    if (dim_ == 1) {
      acc += modes_[modeIndex(k1, 0)] * std::polar(1.0, k1 * theta[0]);
    } else {
      for (int k2 = -cutoff_; k2 <= cutoff_; ++k2) {
        acc += modes_[modeIndex(k1, k2)] * std::polar(1.0, k1 * theta[0] + k2 * theta[1]);
      }
    }
  }
  return acc.real();
}

double SpectralField::dot(const SpectralField& other) const {
  if (other.dim_ != dim_ || other.cutoff_ != cutoff_) {
    throw PreconditionError("SpectralField::dot: shape mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    acc += (std::conj(modes_[i]) * other.modes_[i]).real();
  }
  return acc * std::pow(2.0 * M_PI, dim_);
}

double SpectralField::norm() const { return std::sqrt(std::max(0.0, dot(*this))); }

double SpectralField::supNorm(int grid_n) const {
  if (grid_n <= 0) grid_n = dealiasGridSize(cutoff_);
  return sample(grid_n).abs().maxCoeff();
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  for (std::size_t i = 0; i < modes_.size(); ++i) modes_[i] += o.modes_[i];
  return *this;
}
SpectralField& SpectralField::operator-=(const SpectralField& o) {
  for (std::size_t i = 0; i < modes_.size(); ++i) modes_[i] -= o.modes_[i];
  return *this;
}
SpectralField& SpectralField::operator*=(double s) {
  for (auto& m : modes_) m *= s;
  return *this;
}
SpectralField SpectralField::operator+(const SpectralField& o) const {
  SpectralField r = *this;
  return r += o;
}
SpectralField SpectralField::operator-(const SpectralField& o) const {
  SpectralField r = *this;
  return r -= o;
}
SpectralField SpectralField::operator*(double s) const {
  SpectralField r = *this;
  return r *= s;
}

int SpectralField::realBasisSize(int dim, int cutoff) {
  const int n = 2 * cutoff + 1;
  return (dim == 1 ? n : n * n) - 1;
}

void SpectralField::realBasisWavenumber(int dim, int cutoff, int index, int& k1, int& k2,
                                        bool& is_sin) {
  // Representative wavenumbers: d=1: k=1..N; d=2: (0,1..N) then (1..N, -N..N).
  const int pair = index / 2;
  is_sin = (index % 2) == 1;
  if (dim == 1) {
    k1 = pair + 1;
    k2 = 0;
    if (k1 > cutoff) throw PreconditionError("realBasisWavenumber: index out of range");
    return;
  }
  const int n = 2 * cutoff + 1;
  if (pair < cutoff) {
    k1 = 0;
    k2 = pair + 1;
  } else {
    const int rest = pair - cutoff;
    k1 = rest / n + 1;
    k2 = rest % n - cutoff;
    if (k1 > cutoff) throw PreconditionError("realBasisWavenumber: index out of range");
  }
}

Eigen::VectorXd SpectralField::toRealCoeffs() const {
  const int size = realBasisSize(dim_, cutoff_);
  Eigen::VectorXd out(size);
  for (int i = 0; i < size; i += 2) {
    int k1, k2;
    bool is_sin;
    realBasisWavenumber(dim_, cutoff_, i, k1, k2, is_sin);
    const std::complex<double> c = modes_[modeIndex(k1, k2)];
    out[i] = 2.0 * c.real();
    out[i + 1] = -2.0 * c.imag();
  }
  return out;
}

SpectralField SpectralField::fromRealCoeffs(int dim, int cutoff, const Eigen::VectorXd& coeffs) {
  if (coeffs.size() != realBasisSize(dim, cutoff)) {
    throw PreconditionError("SpectralField::fromRealCoeffs: size mismatch");
  }
  SpectralField f(dim, cutoff);
  for (int i = 0; i < coeffs.size(); i += 2) {
    int k1, k2;
    bool is_sin;
    realBasisWavenumber(dim, cutoff, i, k1, k2, is_sin);
    const std::complex<double> c(0.5 * coeffs[i], -0.5 * coeffs[i + 1]);
    f.modes_[f.modeIndex(k1, k2)] = c;
    f.modes_[f.modeIndex(-k1, -k2)] = std::conj(c);
  }
  return f;
}

SpectralField SpectralField::realBasisFunction(int dim, int cutoff, int index) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(realBasisSize(dim, cutoff));
  c[index] = 1.0;
  return fromRealCoeffs(dim, cutoff, c);
}

void SpectralField::symmetrize() {
  for (int k1 = -cutoff_; k1 <= cutoff_; ++k1) {
    const int k2max = dim_ == 1 ? 0 : cutoff_;
    for (int k2 = -k2max; k2 <= k2max; ++k2) {
      const std::complex<double> avg =
          0.5 * (modes_[modeIndex(k1, k2)] + std::conj(modes_[modeIndex(-k1, -k2)]));
      modes_[modeIndex(k1, k2)] = avg;
      modes_[modeIndex(-k1, -k2)] = std::conj(avg);
    }
  }
}

SpectralField SpectralField::withCutoff(int new_cutoff) const {
  SpectralField out(dim_, new_cutoff);
  const int kmax = std::min(cutoff_, new_cutoff);
  for (int k1 = -kmax; k1 <= kmax; ++k1) {
    const int k2max = dim_ == 1 ? 0 : kmax;
    for (int k2 = -k2max; k2 <= k2max; ++k2) {
      out.modes_[out.modeIndex(k1, k2)] = modes_[modeIndex(k1, k2)];
    }
  }
  return out;
}

int dealiasGridSize(int cutoff) {
  int m = 3 * cutoff + 3;
  if (m % 2 == 0) m += 1;
  return m;
}

double gridIntegral(const Eigen::ArrayXd& values, int dim, int grid_n) {
  const std::size_t total = dim == 1 ? std::size_t(grid_n) : std::size_t(grid_n) * grid_n;
  if (static_cast<std::size_t>(values.size()) != total) {
    throw PreconditionError("gridIntegral: sample count mismatch");
  }
  return values.mean() * std::pow(2.0 * M_PI, dim);
}

}  // namespace hamlag
