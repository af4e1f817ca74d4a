#include "executor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "qglm/errors.hpp"
#include "qglm/expm.hpp"
#include "qglm/fock_state.hpp"
#include "qglm/gates.hpp"
#include "param_layout.hpp"

namespace qglm::internal {

namespace {

constexpr int kTile = 32;  // observations per panel; also the lane count
constexpr int kLowChunk = 4;  // digits below a beamsplitter pair per pass
constexpr double kMinPreNormSquared = 0.25;

struct BsData {
  int pair = 0;  // acts on modes (pair, pair + 1); a is the lower mode
  int theta_index = -1;
  int phi_index = -1;
  double phi = 0.0;
  bool has_phase = false;
  std::vector<Eigen::MatrixXd> blocks;  // real mixing core per total photons
  Eigen::VectorXd pc, ps;               // cos/sin(d * phi) per digit d
};

struct SqueezeData {
  int mode = 0;
  int param_index = -1;
  Eigen::MatrixXd s, st;
};

struct DiagData {
  int mode = 0;
  int param_index = -1;
  Eigen::VectorXd weight;  // d or d^2 per digit (generator weights)
  Eigen::VectorXd pc, ps;  // cos/sin(angle * weight[d])
};

enum class Kind { kBs, kSqueeze, kDiag };

struct Gate {
  Kind kind = Kind::kDiag;
  BsData bs;
  SqueezeData squeeze;
  DiagData diag;
};

void resize_panel(Panel& p, std::int64_t dim) {
  if (p.re.rows() != kTile || p.re.cols() != dim) {
    p.re.resize(kTile, dim);
    p.im.resize(kTile, dim);
  }
}

// dst = (c + i s) * src over `count` lanes; in place is fine. Lanes of
// unused observations carry stale values; they never mix with live lanes,
// so rotating them too is harmless and keeps the trip count fixed.
inline void rotate_lanes(const double* sr, const double* si, double* dr,
                         double* di, std::int64_t count, double c, double s) {
  for (std::int64_t t = 0; t < count; ++t) {
    const double r = sr[t], i = si[t];
    dr[t] = r * c - i * s;
    di[t] = i * c + r * s;
  }
}

// One beamsplitter over the whole panel: dst = Phi B(theta) Phi^dagger src
// (or the adjoint; either way the phase sandwich is the same). lo is the
// Fock stride of the lower mode of the pair. The mixing core B conserves
// the pair's total photon number, so it splits into small dense blocks
// whose members sit at superdigit step (1 - c). The Phi^dagger rotation is
// folded into the gather and Phi into the store, so src is read once and
// dst written once. Digits below the pair are processed kLowChunk at a
// time: consecutive low digits are contiguous in memory, so wider chunks
// turn the scattered member accesses into fewer, longer runs. src and dst
// must not alias.
void bs_apply(const double* sr, const double* si, double* dr, double* di,
              std::int64_t dim, std::int64_t lo, const BsData& g, bool adjoint,
              const std::vector<int>& block_lo,
              const std::vector<int>& block_size, double* xr, double* xi,
              int c) {
  const std::int64_t d2 = static_cast<std::int64_t>(c) * c;
  const std::int64_t slab = lo * d2;
  const double* pc = g.pc.data();
  const double* ps = g.ps.data();
  constexpr std::int64_t kSlot = kLowChunk * kTile;  // member slot in x buffer

  for (std::int64_t off = 0; off < dim; off += slab) {
    for (std::int64_t low0 = 0; low0 < lo; low0 += kLowChunk) {
      const std::int64_t span =
          std::min<std::int64_t>(kLowChunk, lo - low0) * kTile;
      const std::int64_t base = off + low0;
      for (std::size_t n = 0; n < block_size.size(); ++n) {
        const int b = block_size[n];
        const int lo_n = block_lo[n];
        const std::int64_t vbase =
            static_cast<std::int64_t>(c) * static_cast<std::int64_t>(n) +
            static_cast<std::int64_t>(lo_n) * (1 - c);
        const std::int64_t vstep = 1 - c;
        if (b < 2) {
          // the phase sandwich cancels on singleton blocks
          const std::int64_t p = (base + vbase * lo) * kTile;
          std::memcpy(dr + p, sr + p, sizeof(double) * span);
          std::memcpy(di + p, si + p, sizeof(double) * span);
          continue;
        }
        const double* wd = g.blocks[n].data();  // column-major b x b
        for (int j = 0; j < b; ++j) {
          const std::int64_t p = (base + (vbase + j * vstep) * lo) * kTile;
          if (g.has_phase) {
            const int na = lo_n + j;
            rotate_lanes(sr + p, si + p, xr + j * kSlot, xi + j * kSlot,
                         span, pc[na], -ps[na]);
          } else {
            std::memcpy(xr + j * kSlot, sr + p, sizeof(double) * span);
            std::memcpy(xi + j * kSlot, si + p, sizeof(double) * span);
          }
        }
        for (int i = 0; i < b; ++i) {
          double accr[kSlot], acci[kSlot];
          {
            const double wv = adjoint ? wd[0 + i * b] : wd[i + 0 * b];
            for (std::int64_t t = 0; t < span; ++t) {
              accr[t] = wv * xr[t];
              acci[t] = wv * xi[t];
            }
          }
          for (int j = 1; j < b; ++j) {
            const double wv = adjoint ? wd[j + i * b] : wd[i + j * b];
            const double* in_r = xr + j * kSlot;
            const double* in_i = xi + j * kSlot;
            for (std::int64_t t = 0; t < span; ++t) {
              accr[t] += wv * in_r[t];
              acci[t] += wv * in_i[t];
            }
          }
          const std::int64_t p = (base + (vbase + i * vstep) * lo) * kTile;
          if (g.has_phase) {
            const int na = lo_n + i;
            rotate_lanes(accr, acci, dr + p, di + p, span, pc[na], ps[na]);
          } else {
            std::memcpy(dr + p, accr, sizeof(double) * span);
            std::memcpy(di + p, acci, sizeof(double) * span);
          }
        }
      }
    }
  }
}

// Diagonal one-mode phase layer.
void diag_apply(const double* sr, const double* si, double* dr, double* di,
                std::int64_t dim, std::int64_t lo, int c, const double* pc,
                const double* ps, bool adjoint) {
  const std::int64_t run = lo * kTile;
  for (std::int64_t off = 0; off < dim; off += lo * c) {
    const std::int64_t p0 = off * kTile;
    std::memcpy(dr + p0, sr + p0, sizeof(double) * run);
    std::memcpy(di + p0, si + p0, sizeof(double) * run);
    for (int d = 1; d < c; ++d) {
      const double cv = pc[d];
      const double sv = adjoint ? -ps[d] : ps[d];
      const std::int64_t p = (off + d * lo) * kTile;
      rotate_lanes(sr + p, si + p, dr + p, di + p, run, cv, sv);
    }
  }
}

// One squeezer: out digit run d = sum_e m(d, e) * in digit run e, where a
// digit run is the lo * kTile contiguous lanes sharing the mode's digit.
// Runs are walked in kTile chunks with stack accumulators so each output
// chunk is stored once. m has checkerboard sparsity (parity conservation),
// hence the zero skips.
void squeeze_apply(const double* sr, const double* si, double* dr, double* di,
                   std::int64_t dim, std::int64_t lo, int c,
                   const Eigen::MatrixXd& m) {
  const std::int64_t run = lo * kTile;
  for (std::int64_t off = 0; off < dim; off += lo * c) {
    const std::int64_t base = off * kTile;
    for (std::int64_t t0 = 0; t0 < run; t0 += kTile) {
      for (int d = 0; d < c; ++d) {
        double accr[kTile], acci[kTile];
        {
          const double wv = m(d, 0);
          const double* in_r = sr + base + t0;
          const double* in_i = si + base + t0;
          for (int t = 0; t < kTile; ++t) {
            accr[t] = wv * in_r[t];
            acci[t] = wv * in_i[t];
          }
        }
        for (int e = 1; e < c; ++e) {
          const double wv = m(d, e);
          if (wv == 0.0) continue;
          const double* in_r = sr + base + e * run + t0;
          const double* in_i = si + base + e * run + t0;
          for (int t = 0; t < kTile; ++t) {
            accr[t] += wv * in_r[t];
            acci[t] += wv * in_i[t];
          }
        }
        std::memcpy(dr + base + d * run + t0, accr, sizeof(double) * kTile);
        std::memcpy(di + base + d * run + t0, acci, sizeof(double) * kTile);
      }
    }
  }
}

// sum over live lanes of weight[digit] * Im(conj(mu) psi)
double diag_im_term(const double* mr, const double* mi, const double* pr,
                    const double* pi, std::int64_t dim, std::int64_t lo,
                    int nc, int c, const double* weight) {
  double acc[kTile] = {0.0};
  for (std::int64_t off = 0; off < dim; off += lo * c) {
    for (int d = 1; d < c; ++d) {
      const double w = weight[d];
      for (std::int64_t i = off + d * lo; i < off + (d + 1) * lo; ++i) {
        const std::int64_t p = i * kTile;
        for (int t = 0; t < nc; ++t) {
          acc[t] += w * (mr[p + t] * pi[p + t] - mi[p + t] * pr[p + t]);
        }
      }
    }
  }
  double total = 0.0;
  for (int t = 0; t < nc; ++t) total += acc[t];
  return total;
}

// Re(mu^dagger G psi) for the squeezer generator G = (aa - a^dag a^dag)/2
double squeeze_term(const double* mr, const double* mi, const double* pr,
                    const double* pi, std::int64_t dim, std::int64_t lo,
                    int nc, int c, const double* cup, const double* cdn) {
  double acc[kTile] = {0.0};
  const std::int64_t two = 2 * lo * kTile;
  for (std::int64_t off = 0; off < dim; off += lo * c) {
    for (int d = 0; d < c; ++d) {
      const double up = cup[d];
      const double dn = cdn[d];
      if (up == 0.0 && dn == 0.0) continue;
      for (std::int64_t i = off + d * lo; i < off + (d + 1) * lo; ++i) {
        const std::int64_t p = i * kTile;
        if (up != 0.0) {
          for (int t = 0; t < nc; ++t) {
            acc[t] +=
                up * (mr[p + t] * pr[p + two + t] + mi[p + t] * pi[p + two + t]);
          }
        }
        if (dn != 0.0) {
          for (int t = 0; t < nc; ++t) {
            acc[t] -=
                dn * (mr[p + t] * pr[p - two + t] + mi[p + t] * pi[p - two + t]);
          }
        }
      }
    }
  }
  double total = 0.0;
  for (int t = 0; t < nc; ++t) total += acc[t];
  return total;
}

// Gradient of the mixing angle: cos(phi) (S1r - S2r) - sin(phi) (S1i + S2i)
// with S1 = mu^dagger K psi and S2 = mu^dagger K^dagger psi, K = a^dagger b.
double bs_theta_term(const double* mr, const double* mi, const double* pr,
                     const double* pi, std::int64_t dim, std::int64_t lo,
                     int nc, const BsData& g, const Eigen::MatrixXd& w_up,
                     const Eigen::MatrixXd& w_dn, int c) {
  double a1r[kTile], a1i[kTile], a2r[kTile], a2i[kTile];
  for (int t = 0; t < kTile; ++t) a1r[t] = a1i[t] = a2r[t] = a2i[t] = 0.0;
  const std::int64_t d2 = static_cast<std::int64_t>(c) * c;
  const std::int64_t slab = lo * d2;
  const std::int64_t up_off = (1 - c) * lo * kTile;
  for (std::int64_t off = 0; off < dim; off += slab) {
    for (int nb = 0; nb < c; ++nb) {
      for (int na = 0; na < c; ++na) {
        const bool has_up = na + 1 < c && nb >= 1;
        const bool has_dn = na >= 1 && nb + 1 < c;
        if (!has_up && !has_dn) continue;
        const double wu = has_up ? w_up(na, nb) : 0.0;
        const double wv = has_dn ? w_dn(na, nb) : 0.0;
        const std::int64_t first =
            off + (static_cast<std::int64_t>(nb) * c + na) * lo;
        for (std::int64_t i = first; i < first + lo; ++i) {
          const std::int64_t p = i * kTile;
          if (has_up) {
            const std::int64_t q = p + up_off;
            for (int t = 0; t < nc; ++t) {
              a1r[t] += wu * (mr[q + t] * pr[p + t] + mi[q + t] * pi[p + t]);
              a1i[t] += wu * (mr[q + t] * pi[p + t] - mi[q + t] * pr[p + t]);
            }
          }
          if (has_dn) {
            const std::int64_t q = p - up_off;
            for (int t = 0; t < nc; ++t) {
              a2r[t] += wv * (mr[q + t] * pr[p + t] + mi[q + t] * pi[p + t]);
              a2i[t] += wv * (mr[q + t] * pi[p + t] - mi[q + t] * pr[p + t]);
            }
          }
        }
      }
    }
  }
  double s1r = 0.0, s1i = 0.0, s2r = 0.0, s2i = 0.0;
  for (int t = 0; t < nc; ++t) {
    s1r += a1r[t];
    s1i += a1i[t];
    s2r += a2r[t];
    s2i += a2i[t];
  }
  const double cp = std::cos(g.phi);
  const double sp = std::sin(g.phi);
  return cp * (s1r - s2r) - sp * (s1i + s2i);
}

// fraw and eta2 per live lane
void readout(const double* pr, const double* pi, std::int64_t dim, int nc,
             int c, const double* sqrt_n, double* fraw, double* eta2) {
  double fr[kTile] = {0.0};
  double e2[kTile] = {0.0};
  for (std::int64_t i = 0; i < dim; ++i) {
    const std::int64_t p = i * kTile;
    for (int t = 0; t < nc; ++t) {
      e2[t] += pr[p + t] * pr[p + t] + pi[p + t] * pi[p + t];
    }
    const int n = static_cast<int>(i % c);
    if (n + 1 < c) {
      const double w = sqrt_n[n + 1];
      for (int t = 0; t < nc; ++t) {
        fr[t] += w * (pr[p + t] * pr[p + kTile + t] +
                      pi[p + t] * pi[p + kTile + t]);
      }
    }
  }
  for (int t = 0; t < nc; ++t) {
    fraw[t] = 2.0 * fr[t];
    eta2[t] = e2[t];
  }
}

// mu = s * (X psi - f psi) with X = a + a^dagger on mode 0, per live lane
void costate(const double* pr, const double* pi, double* mr, double* mi,
             std::int64_t dim, int nc, int c, const double* sqrt_n,
             const double* f, const double* s) {
  for (std::int64_t i = 0; i < dim; ++i) {
    const std::int64_t p = i * kTile;
    const int n = static_cast<int>(i % c);
    const double w_up = n + 1 < c ? sqrt_n[n + 1] : 0.0;
    const double w_dn = n > 0 ? sqrt_n[n] : 0.0;
    for (int t = 0; t < nc; ++t) {
      double xr = -f[t] * pr[p + t];
      double xi = -f[t] * pi[p + t];
      if (n + 1 < c) {
        xr += w_up * pr[p + kTile + t];
        xi += w_up * pi[p + kTile + t];
      }
      if (n > 0) {
        xr += w_dn * pr[p - kTile + t];
        xi += w_dn * pi[p - kTile + t];
      }
      mr[p + t] = s[t] * xr;
      mi[p + t] = s[t] * xi;
    }
  }
}

}  // namespace

struct ExecutorOps {
  using E = BatchedExecutor;

  static std::vector<Eigen::MatrixXd> bs_blocks(const E& e, double theta) {
    std::vector<Eigen::MatrixXd> blocks(e.block_size_.size());
    for (std::size_t n = 0; n < e.block_size_.size(); ++n) {
      const int b = e.block_size_[n];
      if (b < 2) {
        blocks[n] = Eigen::MatrixXd::Ones(1, 1);
        continue;
      }
      Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(b, b);
      for (int j = 0; j + 1 < b; ++j) {
        const int na = e.block_lo_[n] + j;
        const int nb = static_cast<int>(n) - na;
        const double k = theta * std::sqrt(static_cast<double>(na + 1) * nb);
        gen(j + 1, j) = k;
        gen(j, j + 1) = -k;
      }
      blocks[n] = matrix_exponential(gen).real();
    }
    return blocks;
  }

  static std::vector<Gate> compile(const E& e, const Eigen::VectorXd& theta) {
    const ParamLayout l = layout_for(e.modes_);
    if (theta.size() != l.total) {
      throw ParameterError("executor: parameter vector has wrong length");
    }
    const int c = e.cutoff_;
    const auto pairs = interferometer_pairs(e.modes_);
    std::vector<Gate> gates;
    gates.reserve(2 * (pairs.size() + e.modes_) + 2 * e.modes_);

    const auto add_bs = [&](std::size_t k, int theta_idx, int phi_idx) {
      Gate g;
      g.kind = Kind::kBs;
      g.bs.pair = pairs[k].first;
      g.bs.theta_index = theta_idx;
      g.bs.phi_index = phi_idx;
      g.bs.phi = theta[phi_idx];
      g.bs.has_phase = g.bs.phi != 0.0;
      g.bs.blocks = bs_blocks(e, theta[theta_idx]);
      g.bs.pc.resize(c);
      g.bs.ps.resize(c);
      for (int d = 0; d < c; ++d) {
        g.bs.pc[d] = std::cos(d * g.bs.phi);
        g.bs.ps[d] = std::sin(d * g.bs.phi);
      }
      gates.push_back(std::move(g));
    };
    const auto add_diag = [&](int mode, int param, bool quadratic) {
      Gate g;
      g.kind = Kind::kDiag;
      g.diag.mode = mode;
      g.diag.param_index = param;
      const double angle = theta[param];
      g.diag.weight.resize(c);
      g.diag.pc.resize(c);
      g.diag.ps.resize(c);
      for (int d = 0; d < c; ++d) {
        const double w =
            quadratic ? static_cast<double>(d) * d : static_cast<double>(d);
        g.diag.weight[d] = w;
        g.diag.pc[d] = std::cos(angle * w);
        g.diag.ps[d] = std::sin(angle * w);
      }
      gates.push_back(std::move(g));
    };

    for (std::size_t k = 0; k < pairs.size(); ++k) {
      add_bs(k, l.i1_theta + static_cast<int>(k),
             l.i1_phi + static_cast<int>(k));
    }
    for (int m = 0; m < e.modes_; ++m) add_diag(m, l.i1_phase + m, false);
    for (int m = 0; m < e.modes_; ++m) {
      Gate g;
      g.kind = Kind::kSqueeze;
      g.squeeze.mode = m;
      g.squeeze.param_index = l.squeeze + m;
      g.squeeze.s = squeezing_gate(theta[l.squeeze + m], c).entries.real();
      g.squeeze.st = g.squeeze.s.transpose();
      gates.push_back(std::move(g));
    }
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      add_bs(k, l.i2_theta + static_cast<int>(k),
             l.i2_phi + static_cast<int>(k));
    }
    for (int m = 0; m < e.modes_; ++m) add_diag(m, l.i2_phase + m, false);
    for (int m = 0; m < e.modes_; ++m) add_diag(m, l.kerr + m, true);
    return gates;
  }

  static const Eigen::VectorXd& coherent_column(E& e, double feature,
                                                int mode) {
    if (!std::isfinite(feature) || std::abs(feature) > 3.5) {
      throw ParameterError(
          "encode_features: feature magnitude above 3.5 at position " +
          std::to_string(mode));
    }
    auto it = e.coherent_cache_.find(feature);
    if (it == e.coherent_cache_.end()) {
      it = e.coherent_cache_
               .emplace(feature,
                        displacement_gate(e.scale_ * feature, e.cutoff_)
                            .entries.col(0)
                            .real())
               .first;
    }
    return it->second;
  }

  // Coherent product states for rows [start, start + nc), built directly in
  // batch-major layout, mode 0 fastest. The encoding is real, so the
  // imaginary parts are zeroed wholesale.
  static void encode_tile(E& e, const Eigen::MatrixXd& x, std::int64_t start,
                          int nc, Panel& out) {
    const int c = e.cutoff_;
    double* cur = e.kron_a_.data();
    double* nxt = e.kron_b_.data();
    double* coh = e.gather_r_.data();  // c x kTile staging for one mode

    const auto stage_mode = [&](int k) {
      for (int t = 0; t < nc; ++t) {
        const Eigen::VectorXd& col = coherent_column(e, x(start + t, k), k);
        for (int n = 0; n < c; ++n) coh[n * kTile + t] = col[n];
      }
    };

    stage_mode(0);
    std::int64_t len = c;
    std::memcpy(cur, coh, sizeof(double) * static_cast<std::size_t>(c) * kTile);
    for (int k = 1; k < e.modes_; ++k) {
      stage_mode(k);
      for (int n = 0; n < c; ++n) {
        const double* a = coh + n * kTile;
        for (std::int64_t j = 0; j < len; ++j) {
          double* dst = nxt + (n * len + j) * kTile;
          const double* src = cur + j * kTile;
          for (int t = 0; t < nc; ++t) dst[t] = a[t] * src[t];
        }
      }
      std::swap(cur, nxt);
      len *= c;
    }
    std::memcpy(out.re.data(), cur,
                sizeof(double) * static_cast<std::size_t>(e.dim_) * kTile);
    out.im.setZero();
  }

  static void apply(E& e, const Gate& g, const Panel& src, Panel& dst,
                    bool adjoint) {
    const int c = e.cutoff_;
    const std::int64_t dim = e.dim_;
    switch (g.kind) {
      case Kind::kBs: {
        const std::int64_t lo = fock_stride(c, g.bs.pair);
        bs_apply(src.re.data(), src.im.data(), dst.re.data(), dst.im.data(),
                 dim, lo, g.bs, adjoint, e.block_lo_, e.block_size_,
                 e.gather_r_.data(), e.gather_i_.data(), c);
        break;
      }
      case Kind::kSqueeze: {
        const std::int64_t lo = fock_stride(c, g.squeeze.mode);
        squeeze_apply(src.re.data(), src.im.data(), dst.re.data(),
                      dst.im.data(), dim, lo, c,
                      adjoint ? g.squeeze.st : g.squeeze.s);
        break;
      }
      case Kind::kDiag: {
        const std::int64_t lo = fock_stride(c, g.diag.mode);
        diag_apply(src.re.data(), src.im.data(), dst.re.data(), dst.im.data(),
                   dim, lo, c, g.diag.pc.data(), g.diag.ps.data(), adjoint);
        break;
      }
    }
  }

  static void check_inputs(const E& e, const Eigen::VectorXd& theta,
                           const Eigen::MatrixXd& x) {
    if (x.cols() != e.modes_) {
      throw ParameterError("executor: feature count must equal num_modes");
    }
    if (x.rows() < 1) {
      throw ParameterError("executor: need at least one observation");
    }
    const ParamLayout l = layout_for(e.modes_);
    if (theta.size() != l.total) {
      throw ParameterError("executor: parameter vector has wrong length");
    }
  }

  static Eigen::VectorXd predict(E& e, const Eigen::VectorXd& theta,
                                 const Eigen::MatrixXd& x) {
    check_inputs(e, theta, x);
    const auto gates = compile(e, theta);
    const std::int64_t n = x.rows();
    resize_panel(e.ping_a_, e.dim_);
    resize_panel(e.ping_b_, e.dim_);

    double fraw[kTile], eta2[kTile];
    Eigen::VectorXd preds(n);
    for (std::int64_t start = 0; start < n; start += kTile) {
      const int nc = static_cast<int>(std::min<std::int64_t>(kTile, n - start));
      encode_tile(e, x, start, nc, e.ping_a_);
      for (const Gate& g : gates) {
        apply(e, g, e.ping_a_, e.ping_b_, false);
        std::swap(e.ping_a_, e.ping_b_);
      }
      readout(e.ping_a_.re.data(), e.ping_a_.im.data(), e.dim_, nc, e.cutoff_,
              e.sqrt_n_.data(), fraw, eta2);
      for (int t = 0; t < nc; ++t) {
        if (eta2[t] < kMinPreNormSquared) {
          throw NumericError(
              "forward: truncation loss, state norm fell below 0.5; increase "
              "the cutoff");
        }
        preds[start + t] = fraw[t] / eta2[t];
      }
    }
    return preds;
  }

  static Eigen::VectorXd gradient(E& e, const Eigen::VectorXd& theta,
                                  const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& y, double* mse_out) {
    check_inputs(e, theta, x);
    const std::int64_t n = x.rows();
    if (y.size() != n) {
      throw ParameterError("executor: need one target per feature row");
    }
    const auto gates = compile(e, theta);
    const std::size_t t_count = gates.size();
    const ParamLayout l = layout_for(e.modes_);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(l.total);

    e.states_.resize(t_count + 1);
    for (auto& p : e.states_) resize_panel(p, e.dim_);
    resize_panel(e.mu_, e.dim_);
    resize_panel(e.mu_tmp_, e.dim_);

    const int c = e.cutoff_;
    const std::int64_t dim = e.dim_;
    double fraw[kTile], eta2[kTile], f[kTile], scale[kTile];
    double mse_acc = 0.0;

    for (std::int64_t start = 0; start < n; start += kTile) {
      const int nc = static_cast<int>(std::min<std::int64_t>(kTile, n - start));
      encode_tile(e, x, start, nc, e.states_[0]);
      for (std::size_t k = 0; k < t_count; ++k) {
        apply(e, gates[k], e.states_[k], e.states_[k + 1], false);
      }

      const Panel& fin = e.states_[t_count];
      readout(fin.re.data(), fin.im.data(), dim, nc, c, e.sqrt_n_.data(),
              fraw, eta2);
      for (int t = 0; t < nc; ++t) {
        if (eta2[t] < kMinPreNormSquared) {
          throw NumericError(
              "gradient: truncation loss, state norm fell below 0.5; "
              "increase the cutoff");
        }
        f[t] = fraw[t] / eta2[t];
        const double diff = f[t] - y[start + t];
        mse_acc += diff * diff;
        // d(mse)/df folded with the normalization denominator
        scale[t] = (2.0 * diff / static_cast<double>(n)) * 2.0 / eta2[t];
      }
      costate(fin.re.data(), fin.im.data(), e.mu_.re.data(), e.mu_.im.data(),
              dim, nc, c, e.sqrt_n_.data(), f, scale);

      for (std::size_t k = t_count; k-- > 0;) {
        const Gate& g = gates[k];
        const Panel& post = e.states_[k + 1];
        const Panel& pre = e.states_[k];
        switch (g.kind) {
          case Kind::kBs: {
            const std::int64_t lo = fock_stride(c, g.bs.pair);
            grad[g.bs.theta_index] += bs_theta_term(
                e.mu_.re.data(), e.mu_.im.data(), post.re.data(),
                post.im.data(), dim, lo, nc, g.bs, e.w_up_, e.w_dn_, c);
            const double phi_post = diag_im_term(
                e.mu_.re.data(), e.mu_.im.data(), post.re.data(),
                post.im.data(), dim, lo, nc, c, e.linear_weight_.data());
            apply(e, g, e.mu_, e.mu_tmp_, true);
            std::swap(e.mu_, e.mu_tmp_);
            const double phi_pre = diag_im_term(
                e.mu_.re.data(), e.mu_.im.data(), pre.re.data(),
                pre.im.data(), dim, lo, nc, c, e.linear_weight_.data());
            grad[g.bs.phi_index] += phi_pre - phi_post;
            break;
          }
          case Kind::kSqueeze: {
            const std::int64_t lo = fock_stride(c, g.squeeze.mode);
            grad[g.squeeze.param_index] += squeeze_term(
                e.mu_.re.data(), e.mu_.im.data(), post.re.data(),
                post.im.data(), dim, lo, nc, c, e.squeeze_up_.data(),
                e.squeeze_dn_.data());
            apply(e, g, e.mu_, e.mu_tmp_, true);
            std::swap(e.mu_, e.mu_tmp_);
            break;
          }
          case Kind::kDiag: {
            const std::int64_t lo = fock_stride(c, g.diag.mode);
            grad[g.diag.param_index] -= diag_im_term(
                e.mu_.re.data(), e.mu_.im.data(), post.re.data(),
                post.im.data(), dim, lo, nc, c, g.diag.weight.data());
            apply(e, g, e.mu_, e.mu_tmp_, true);
            std::swap(e.mu_, e.mu_tmp_);
            break;
          }
        }
      }
    }

    if (mse_out != nullptr) *mse_out = mse_acc / static_cast<double>(n);
    return grad;
  }
};

BatchedExecutor::BatchedExecutor(int num_modes, int cutoff,
                                 double encoding_scale)
    : modes_(num_modes), cutoff_(cutoff), scale_(encoding_scale) {
  if (num_modes < 1) {
    throw ParameterError("executor: num_modes must be at least 1");
  }
  if (cutoff < 2) {
    throw ParameterError("executor: cutoff must be at least 2");
  }
  if (!(encoding_scale > 0.0) || !std::isfinite(encoding_scale)) {
    throw ParameterError("executor: encoding_scale must be positive");
  }
  dim_ = fock_stride(cutoff, num_modes);

  const int c = cutoff;
  const int blocks = 2 * c - 1;
  block_lo_.resize(blocks);
  block_size_.resize(blocks);
  for (int n = 0; n < blocks; ++n) {
    const int lo = std::max(0, n - (c - 1));
    const int hi = std::min(n, c - 1);
    block_lo_[n] = lo;
    block_size_[n] = hi - lo + 1;
  }
  w_up_.resize(c, c);
  w_dn_.resize(c, c);
  for (int na = 0; na < c; ++na) {
    for (int nb = 0; nb < c; ++nb) {
      w_up_(na, nb) = std::sqrt(static_cast<double>(na + 1) * nb);
      w_dn_(na, nb) = std::sqrt(static_cast<double>(na) * (nb + 1));
    }
  }
  sqrt_n_.resize(c + 1);
  for (int n = 0; n <= c; ++n) sqrt_n_[n] = std::sqrt(static_cast<double>(n));
  squeeze_up_.assign(c, 0.0);
  squeeze_dn_.assign(c, 0.0);
  for (int d = 0; d < c; ++d) {
    if (d + 2 < c) {
      squeeze_up_[d] = 0.5 * std::sqrt(static_cast<double>(d + 1) * (d + 2));
    }
    if (d >= 2) {
      squeeze_dn_[d] = 0.5 * std::sqrt(static_cast<double>(d) * (d - 1));
    }
  }
  linear_weight_.resize(c);
  for (int d = 0; d < c; ++d) linear_weight_[d] = d;

  gather_r_.resize(static_cast<std::size_t>(2 * c) * kLowChunk * kTile);
  gather_i_.resize(static_cast<std::size_t>(2 * c) * kLowChunk * kTile);
  kron_a_.resize(static_cast<std::size_t>(dim_) * kTile);
  kron_b_.resize(static_cast<std::size_t>(dim_) * kTile);
}

Eigen::VectorXd BatchedExecutor::predict(const Eigen::VectorXd& theta,
                                         const Eigen::MatrixXd& features) {
  return ExecutorOps::predict(*this, theta, features);
}

double BatchedExecutor::mse(const Eigen::VectorXd& theta,
                            const Eigen::MatrixXd& features,
                            const Eigen::VectorXd& targets) {
  if (targets.size() != features.rows()) {
    throw ParameterError("executor: need one target per feature row");
  }
  const Eigen::VectorXd preds = ExecutorOps::predict(*this, theta, features);
  return (preds - targets).squaredNorm() / static_cast<double>(targets.size());
}

Eigen::VectorXd BatchedExecutor::gradient(const Eigen::VectorXd& theta,
                                          const Eigen::MatrixXd& features,
                                          const Eigen::VectorXd& targets,
                                          double* mse_out) {
  return ExecutorOps::gradient(*this, theta, features, targets, mse_out);
}

}  // namespace qglm::internal
