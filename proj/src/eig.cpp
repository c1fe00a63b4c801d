#include <algorithm>
#include <cmath>
#include <sstream>

#include "slgfm/errors.hpp"
#include "slgfm/smallsig.hpp"

namespace slgfm {

namespace {

constexpr int kMaxSweepsPerEigenvalue = 60;

// Parlett-Reinsch balancing with radix-2 scaling so no rounding is introduced.
void balance(Mat& a) {
  const int n = static_cast<int>(a.rows());
  bool done = false;
  while (!done) {
    done = true;
    for (int i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / 2.0;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= 2.0;
        c *= 4.0;
      }
      g = r * 2.0;
      while (c > g) {
        f /= 2.0;
        c /= 4.0;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

// Householder reduction to upper Hessenberg form (similarity, in place).
void hessenberg(Mat& a) {
  const int n = static_cast<int>(a.rows());
  for (int k = 0; k + 2 < n; ++k) {
    const int m = n - k - 1;
    Vec v = a.col(k).tail(m);
    const double alpha = v.norm();
    if (alpha == 0.0) continue;
    v[0] += v[0] >= 0 ? alpha : -alpha;
    const double vn = v.norm();
    if (vn == 0.0) continue;
    v /= vn;
    a.bottomRows(m) -= 2.0 * v * (v.transpose() * a.bottomRows(m));
    a.rightCols(m) -= 2.0 * (a.rightCols(m) * v) * v.transpose();
    a.col(k).tail(m - 1).setZero();
  }
}

double sign_of(double a, double b) { return b >= 0 ? std::abs(a) : -std::abs(a); }

// Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).
std::vector<cd> hessenberg_qr(Mat& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<double> wr(n, 0.0), wi(n, 0.0);
  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));

  int nn = n - 1;
  double t = 0.0;
  double p = 0, q = 0, r = 0, s = 0, w = 0, x = 0, y = 0, z = 0;
  while (nn >= 0) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l >= 1; --l) {
        s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) + s == s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      x = a(nn, nn);
      if (l == nn) {
        wr[nn] = x + t;
        wi[nn] = 0.0;
        --nn;
      } else {
        y = a(nn - 1, nn - 1);
        w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            wr[nn - 1] = wr[nn] = x + z;
            if (z != 0.0) wr[nn] = x - w / z;
            wi[nn - 1] = wi[nn] = 0.0;
          } else {
            wr[nn - 1] = wr[nn] = x + p;
            wi[nn] = z;
            wi[nn - 1] = -z;
          }
          nn -= 2;
        } else {
          if (its == kMaxSweepsPerEigenvalue) {
            std::ostringstream msg;
            msg << "eigs: QR iteration did not converge; " << (n - 1 - nn) << " of " << n
                << " eigenvalues deflated, active block [" << l << ", " << nn << "]";
            throw NoConvergence(msg.str());
          }
          if (its > 0 && its % 10 == 0) {
            // exceptional shift
            t += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u + v == v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k != nn - 1) r = a(k + 2, k - 1);
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            s = sign_of(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (k == m) {
              if (l != m) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= nn; ++j) {
              p = a(k, j) + q * a(k + 1, j);
              if (k != nn - 1) {
                p += r * a(k + 2, j);
                a(k + 2, j) -= p * z;
              }
              a(k + 1, j) -= p * y;
              a(k, j) -= p * x;
            }
            const int mmin = nn < k + 3 ? nn : k + 3;
            for (int i = l; i <= mmin; ++i) {
              p = x * a(i, k) + y * a(i, k + 1);
              if (k != nn - 1) {
                p += z * a(i, k + 2);
                a(i, k + 2) -= p * r;
              }
              a(i, k + 1) -= p * q;
              a(i, k) -= p;
            }
          }
        }
      }
    } while (l < nn - 1);
  }

  std::vector<cd> out(n);
  for (int i = 0; i < n; ++i) out[i] = {wr[i], wi[i]};
  return out;
}

}  // namespace

std::vector<cd> eigs(const Mat& a_in) {
  if (a_in.rows() != a_in.cols()) throw std::invalid_argument("eigs: matrix must be square");
  if (!a_in.allFinite()) throw std::invalid_argument("eigs: matrix has non-finite entries");
  const int n = static_cast<int>(a_in.rows());
  if (n == 0) return {};
  Mat a = a_in;
  balance(a);
  hessenberg(a);
  std::vector<cd> ev = hessenberg_qr(a);

  // Pairs come out as (+im, -im) or (-im, +im) depending on the 2x2 block; normalize.
  for (int i = 0; i + 1 < n; ++i) {
    if (ev[i].imag() != 0.0 && ev[i + 1] == std::conj(ev[i])) {
      if (ev[i].imag() < 0) std::swap(ev[i], ev[i + 1]);
      ++i;
    }
  }
  return ev;
}

CMat eigenvectors(const Mat& a, const std::vector<cd>& lambdas) {
  const int n = static_cast<int>(a.rows());
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const CMat ac = a.cast<cd>();
  CMat out(n, static_cast<int>(lambdas.size()));
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    // offset keeps the shifted matrix numerically invertible
    const cd shift = lambdas[k] + cd(1e-10 * scale, 1e-10 * scale);
    Eigen::PartialPivLU<CMat> lu(ac - shift * CMat::Identity(n, n));
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v[i] = cd(1.0 + 0.1 * i, 0.05 * (n - i));
    v.normalize();
    for (int it = 0; it < 3; ++it) {
      v = lu.solve(v);
      v.normalize();
    }
    // fix the phase so the largest component is real positive
    int imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    v *= std::abs(v[imax]) / v[imax];
    out.col(static_cast<int>(k)) = v;
  }
  return out;
}

Mat participation(const Mat& a, const std::vector<cd>& lambdas) {
  const CMat v = eigenvectors(a, lambdas);
  const CMat w = v.fullPivLu().inverse();
  const int n = static_cast<int>(a.rows());
  Mat p(n, static_cast<int>(lambdas.size()));
  for (int k = 0; k < p.cols(); ++k) {
    for (int i = 0; i < n; ++i) p(i, k) = std::abs(v(i, k) * w(k, i));
    const double sum = p.col(k).sum();
    if (sum > 0) p.col(k) /= sum;
  }
  return p;
}

}  // namespace slgfm
