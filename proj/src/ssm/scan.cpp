// Copyright 2026 The ssmtrack Authors. Apache 2.0 License.
#include "ssmtrack/ssm/scan.hpp"

#include <cmath>
#include <string>

namespace ssmtrack::ssm {
namespace {

template <typename T>
bool use_euler(T z) {
  return std::abs(z) < static_cast<T>(simd::kEulerThreshold);
}

template <typename T>
T drive_gain(T dt, T a, T z) {
  return use_euler(z) ? dt : std::expm1(z) / a;
}

template <typename T>
void check_shape(const Matrix<T>& m, std::size_t rows, std::size_t cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ContractError(std::string("scan: ") + name + " has shape " + shape_string(m) + ", expected " +
                        std::to_string(rows) + "x" + std::to_string(cols));
  }
}

// Forward pass keeping every hidden state when `states` is non-null (states(0) = h0).
template <typename T>
ScanOutput<T> run_scan(const ScanInputs<T>& in, const simd::KernelSet<T>& k, Array3<T>* states) {
  in.validate();
  const std::size_t len = in.length();
  const std::size_t dch = in.channels();
  const std::size_t nst = in.state();
  ScanOutput<T> out{Matrix<T>(len, dch), in.h0};
  if (states != nullptr) {
    *states = Array3<T>(len + 1, dch, nst);
    std::copy(in.h0.data(), in.h0.data() + in.h0.size(), states->slice(0));
  }
  simd::ScanStepArgs<T> args;
  args.channels = dch;
  args.state = nst;
  args.A = in.A.data();
  args.h = out.h_final.data();
  for (std::size_t t = 0; t < len; ++t) {
    args.delta = in.delta.row(t).data();
    args.x = in.x.row(t).data();
    args.B = in.B.row(t).data();
    args.C = in.C.row(t).data();
    args.y = out.y.row(t).data();
    k.scan_step(args);
    if (states != nullptr) std::copy(out.h_final.data(), out.h_final.data() + dch * nst, states->slice(t + 1));
  }
  return out;
}

}  // namespace

template <typename T>
StateCoefficients<T>::StateCoefficients(std::size_t channels, std::size_t state)
    : log_magnitude_(channels, state) {
  for (std::size_t d = 0; d < channels; ++d) {
    for (std::size_t n = 0; n < state; ++n) log_magnitude_(d, n) = std::log(static_cast<T>(n + 1));
  }
}

template <typename T>
StateCoefficients<T> StateCoefficients<T>::from_realized(const Matrix<T>& A) {
  StateCoefficients out;
  out.log_magnitude_ = Matrix<T>(A.rows(), A.cols());
  for (std::size_t i = 0; i < A.size(); ++i) {
    if (!(A[i] < T(0))) throw DomainError("StateCoefficients: A entries must be strictly negative");
    out.log_magnitude_[i] = std::log(-A[i]);
  }
  return out;
}

template <typename T>
Matrix<T> StateCoefficients<T>::realized() const {
  Matrix<T> A(channels(), state());
  for (std::size_t i = 0; i < A.size(); ++i) A[i] = -std::exp(log_magnitude_[i]);
  return A;
}

template <typename T>
void ScanInputs<T>::validate() const {
  const std::size_t len = x.rows();
  const std::size_t dch = x.cols();
  const std::size_t nst = A.cols();
  require(len >= 1, "scan: sequence length must be >= 1");
  require(dch >= 1 && nst >= 1, "scan: channel and state dimensions must be >= 1");
  check_shape(delta, len, dch, "delta");
  check_shape(B, len, nst, "B");
  check_shape(C, len, nst, "C");
  check_shape(A, dch, nst, "A");
  check_shape(h0, dch, nst, "h0");
  for (std::size_t i = 0; i < delta.size(); ++i) {
    if (!(delta[i] > T(0))) throw DomainError("scan: delta entries must be strictly positive");
  }
  for (std::size_t i = 0; i < A.size(); ++i) {
    if (!(A[i] < T(0))) throw DomainError("scan: A entries must be strictly negative");
  }
}

template <typename T>
ScanInputs<T> make_scan_inputs(Matrix<T> x, Matrix<T> delta, Matrix<T> B, Matrix<T> C, Matrix<T> A) {
  Matrix<T> h0(x.cols(), A.cols());
  return ScanInputs<T>{std::move(x), std::move(delta), std::move(B), std::move(C), std::move(A), std::move(h0)};
}

template <typename T>
DiscreteTransition<T> zoh_discretize(const Matrix<T>& A, const Matrix<T>& delta, const Matrix<T>& B,
                                     const Matrix<T>& x) {
  const std::size_t len = x.rows();
  const std::size_t dch = x.cols();
  const std::size_t nst = A.cols();
  check_shape(delta, len, dch, "delta");
  check_shape(B, len, nst, "B");
  check_shape(A, dch, nst, "A");
  DiscreteTransition<T> tr{Array3<T>(len, dch, nst), Array3<T>(len, dch, nst)};
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t d = 0; d < dch; ++d) {
      const T dt = delta(t, d);
      if (!(dt > T(0))) throw DomainError("zoh_discretize: delta entries must be strictly positive");
      for (std::size_t n = 0; n < nst; ++n) {
        const T z = dt * A(d, n);
        tr.abar(t, d, n) = std::exp(z);
        tr.drive(t, d, n) = drive_gain(dt, A(d, n), z) * B(t, n) * x(t, d);
      }
    }
  }
  return tr;
}

template <typename T>
ScanOutput<T> selective_scan(const ScanInputs<T>& in) {
  return run_scan<T>(in, simd::active_kernels<T>(), nullptr);
}

template <typename T>
ScanOutput<T> selective_scan(const ScanInputs<T>& in, const simd::KernelSet<T>& kernels) {
  return run_scan<T>(in, kernels, nullptr);
}

template <typename T>
ScanOutput<T> selective_scan_oracle(const ScanInputs<T>& in) {
  in.validate();
  const std::size_t len = in.length();
  const std::size_t dch = in.channels();
  const std::size_t nst = in.state();
  const DiscreteTransition<T> tr = zoh_discretize(in.A, in.delta, in.B, in.x);

  ScanOutput<T> out{Matrix<T>(len, dch), Matrix<T>(dch, nst)};
  Array3<T> hidden(len, dch, nst);
  // transfer(t, s + 1) = prod_{u = s+1 .. t} abar_u; column 0 carries the h0 product.
  Matrix<T> transfer(len, len + 1);
  for (std::size_t d = 0; d < dch; ++d) {
    for (std::size_t n = 0; n < nst; ++n) {
      transfer.fill(T(0));
      for (std::size_t t = 0; t < len; ++t) {
        transfer(t, t + 1) = T(1);
        for (std::size_t c = 0; c <= t; ++c) {
          const T prev = (t == 0) ? T(1) : transfer(t - 1, c);
          transfer(t, c) = prev * tr.abar(t, d, n);
        }
      }
      for (std::size_t t = 0; t < len; ++t) {
        T h = transfer(t, 0) * in.h0(d, n);
        for (std::size_t s = 0; s <= t; ++s) h += transfer(t, s + 1) * tr.drive(s, d, n);
        hidden(t, d, n) = h;
      }
      out.h_final(d, n) = hidden(len - 1, d, n);
    }
  }
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t d = 0; d < dch; ++d) {
      T acc = 0;
      for (std::size_t n = 0; n < nst; ++n) acc += in.C(t, n) * hidden(t, d, n);
      out.y(t, d) = acc;
    }
  }
  return out;
}

template <typename T>
ScanGradients<T> selective_scan_backward(const ScanInputs<T>& in, const Matrix<T>& d_y,
                                         const Matrix<T>& d_hfinal) {
  in.validate();
  const std::size_t len = in.length();
  const std::size_t dch = in.channels();
  const std::size_t nst = in.state();
  check_shape(d_y, len, dch, "d_y");
  check_shape(d_hfinal, dch, nst, "d_hfinal");

  Array3<T> states;
  run_scan(in, simd::active_kernels<T>(), &states);

  ScanGradients<T> g{Matrix<T>(len, dch), Matrix<T>(len, dch), Matrix<T>(dch, nst),
                     Matrix<T>(len, nst), Matrix<T>(len, nst), Matrix<T>(dch, nst)};
  Matrix<T> carry = d_hfinal;  // dL/dh_t flowing back from step t + 1
  for (std::size_t step = len; step-- > 0;) {
    for (std::size_t d = 0; d < dch; ++d) {
      const T dt = in.delta(step, d);
      const T xd = in.x(step, d);
      const T gy = d_y(step, d);
      for (std::size_t n = 0; n < nst; ++n) {
        const T a = in.A(d, n);
        const T z = dt * a;
        const T abar = std::exp(z);
        const T gain = drive_gain(dt, a, z);
        const T h = states(step + 1, d, n);
        const T h_prev = states(step, d, n);
        const T gh = carry(d, n) + in.C(step, n) * gy;

        g.C(step, n) += gy * h;
        const T d_abar = gh * h_prev;
        const T d_gain = gh * in.B(step, n) * xd;
        g.B(step, n) += gh * gain * xd;
        g.x(step, d) += gh * gain * in.B(step, n);
        g.delta(step, d) += d_abar * abar * a;
        g.A(d, n) += d_abar * abar * dt;
        if (use_euler(z)) {
          g.delta(step, d) += d_gain;
        } else {
          g.delta(step, d) += d_gain * abar;
          g.A(d, n) += d_gain * (dt * abar - gain) / a;
        }
        carry(d, n) = gh * abar;
      }
    }
  }
  g.h0 = carry;
  return g;
}

#define SSMTRACK_INSTANTIATE(T)                                                                            \
  template class StateCoefficients<T>;                                                                     \
  template struct ScanInputs<T>;                                                                           \
  template ScanInputs<T> make_scan_inputs(Matrix<T>, Matrix<T>, Matrix<T>, Matrix<T>, Matrix<T>);          \
  template DiscreteTransition<T> zoh_discretize(const Matrix<T>&, const Matrix<T>&, const Matrix<T>&,      \
                                                const Matrix<T>&);                                         \
  template ScanOutput<T> selective_scan(const ScanInputs<T>&);                                             \
  template ScanOutput<T> selective_scan(const ScanInputs<T>&, const simd::KernelSet<T>&);                  \
  template ScanOutput<T> selective_scan_oracle(const ScanInputs<T>&);                                      \
  template ScanGradients<T> selective_scan_backward(const ScanInputs<T>&, const Matrix<T>&, const Matrix<T>&);

SSMTRACK_INSTANTIATE(float)
SSMTRACK_INSTANTIATE(double)
#undef SSMTRACK_INSTANTIATE

}  // namespace ssmtrack::ssm
