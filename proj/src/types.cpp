#include "lpjmm/types.hpp"

#include <cmath>

namespace lpjmm {

void ModelState::validate(const Hyperparameters& hp) const {
  const int n = n_actors();
  if (n < 1) throw std::invalid_argument("state has no actors");
  if (latent_dim() != hp.K) throw std::invalid_argument("z has wrong latent dimension");
  if (static_cast<int>(g.size()) != n) throw std::invalid_argument("g length mismatch");
  for (int gi : g)
    if (gi < 1 || gi > hp.H) throw std::invalid_argument("group label out of 1..H");
  const int L = n_layers();
  if (b.size() != L || theta.size() != L) throw std::invalid_argument("layer parameter length mismatch");
  if ((theta.array() <= 0).any()) throw std::invalid_argument("theta must be positive");
  if (sigma2 <= 0 || tau2 <= 0) throw std::invalid_argument("sigma2 and tau2 must be positive");
  if (phi < hp.u1 || phi > hp.u2) throw std::invalid_argument("phi outside [u1, u2]");
  if (omega.size() != hp.H || mu.rows() != hp.H || mu.cols() != hp.K || kappa2.size() != hp.H)
    throw std::invalid_argument("mixture parameter shape mismatch");
  if ((omega.array() <= 0).any() || (omega.array() > 1).any() ||
      std::abs(omega.sum() - 1.0) > 1e-8)
    throw std::invalid_argument("omega must be simplex weights");
  if ((kappa2.array() <= 0).any()) throw std::invalid_argument("kappa2 must be positive");
  if (!z.allFinite() || !a.allFinite() || !b.allFinite() || !mu.allFinite() || !std::isfinite(beta))
    throw std::invalid_argument("non-finite state entries");
}

}  // namespace lpjmm
