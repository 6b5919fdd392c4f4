#include "pac/stationary.hpp"

#include "pac/kron.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace pac {

namespace {

void require_row_stochastic(const Matrix& P) {
  if (P.rows() != P.cols() || P.rows() == 0)
    throw std::invalid_argument("transition matrix must be square and nonempty");
  for (Index m = 0; m < P.rows(); ++m)
    if (std::abs(P.row(m).sum() - 1.0) > 1e-9 || P.row(m).minCoeff() < -1e-15)
      throw std::invalid_argument("matrix is not row-stochastic at row " + std::to_string(m + 1));
}

// Clamps round-off negatives and renormalizes; large clamps mean the solve
// went wrong and are refused.
RowVector finalize_distribution(RowVector b) {
  double clamped = 0.0;
  for (Index i = 0; i < b.size(); ++i)
    if (b(i) < 0.0) {
      clamped = std::max(clamped, -b(i));
      b(i) = 0.0;
    }
  if (clamped > 1e-9) {
    std::ostringstream os;
    os << "stationary solve produced negative mass " << clamped;
    throw std::runtime_error(os.str());
  }
  const double s = b.sum();
  if (std::abs(s - 1.0) > 1e-10)
    throw std::runtime_error("stationary distribution does not sum to 1");
  return b / s;
}

// Iterative Tarjan over the positive-probability support graph.
struct SccResult {
  std::vector<int> component;  // state -> scc id
  int count = 0;
};

SccResult strongly_connected_components(const Matrix& P) {
  const int n = static_cast<int>(P.rows());
  std::vector<std::vector<int>> adj(n);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      if (P(m, k) > 0.0) adj[m].push_back(k);

  SccResult res;
  res.component.assign(n, -1);
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int next_index = 0;

  struct Frame {
    int v;
    std::size_t child;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, child] = call.back();
      if (child < adj[v].size()) {
        const int w = adj[v][child++];
        if (index[w] == -1) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
      } else {
        if (low[v] == index[v]) {
          int w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            res.component[w] = res.count;
          } while (w != v);
          ++res.count;
        }
        const int done = v;
        call.pop_back();
        if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[done]);
      }
    }
  }
  return res;
}

}  // namespace

int count_closed_classes(const Matrix& P) {
  const auto scc = strongly_connected_components(P);
  std::vector<bool> closed(scc.count, true);
  const int n = static_cast<int>(P.rows());
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      if (P(m, k) > 0.0 && scc.component[m] != scc.component[k]) closed[scc.component[m]] = false;
  return static_cast<int>(std::count(closed.begin(), closed.end(), true));
}

RowVector stationary_direct(const Matrix& P) {
  require_row_stochastic(P);
  const Index n = P.rows();
  if (n == 1) return RowVector::Ones(1);

  if (count_closed_classes(P) != 1) throw NonUnichainError("A3 violated: non-unichain");

  Matrix A(n + 1, n);
  A.topRows(n) = P.transpose() - Matrix::Identity(n, n);
  A.bottomRows(1).setOnes();
  Vector rhs = Vector::Zero(n + 1);
  rhs(n) = 1.0;
  const Vector b = A.colPivHouseholderQr().solve(rhs);

  RowVector beta = b.transpose();
  const double residual = (beta * P - beta).cwiseAbs().maxCoeff();
  if (residual > 1e-10) {
    std::ostringstream os;
    os << "stationary solve residual " << residual << " exceeds 1e-10";
    throw std::runtime_error(os.str());
  }
  return finalize_distribution(std::move(beta));
}

RowVector stationary_power(const Matrix& P, double tol, std::uint64_t max_iter) {
  require_row_stochastic(P);
  const Index n = P.rows();
  RowVector b = RowVector::Constant(n, 1.0 / static_cast<double>(n));

  RowVector window_sum = RowVector::Zero(n);
  RowVector prev_window_avg;
  std::uint64_t window_len = 8, in_window = 0;
  double last_residual = 1.0;

  for (std::uint64_t it = 0; it < max_iter; ++it) {
    RowVector next = b * P;
    last_residual = (next - b).cwiseAbs().maxCoeff();
    if (last_residual < tol) return finalize_distribution(std::move(next));
    b = std::move(next);
    window_sum += b;
    if (++in_window == window_len) {
      RowVector avg = window_sum / static_cast<double>(window_len);
      if (prev_window_avg.size() > 0) {
        last_residual = (avg - prev_window_avg).cwiseAbs().maxCoeff();
        if (last_residual < tol) return finalize_distribution(std::move(avg));
      }
      prev_window_avg = std::move(avg);
      window_sum.setZero();
      in_window = 0;
      window_len *= 2;
    }
  }
  std::ostringstream os;
  os << "power iteration did not converge within " << max_iter
     << " iterations (last residual " << last_residual << ")";
  throw std::runtime_error(os.str());
}

RowVector stationary_factored(const CompositeSystem& sys, const FactoredPolicy& p) {
  check_policy(sys, p);
  Matrix beta = stationary_direct(sys.subsystems[0].policy_matrix(p.action[0]));
  for (int i = 1; i < sys.num_subsystems(); ++i)
    beta = kron(beta, stationary_direct(sys.subsystems[i].policy_matrix(p.action[i])),
                sys.composite_cap);
  return beta.row(0);
}

}  // namespace pac
