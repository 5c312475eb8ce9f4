#include "varclust/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "varclust/errors.hpp"

namespace varclust {

namespace {

double resultant_norm(const Matrix& x, const Matrix& metric, const Weights& w) {
  // ||X M X' W||^2 = tr((M X' W X)^2)
  const Matrix c = metric * (x.transpose() * w.values().asDiagonal() * x);
  return std::sqrt(std::max(0.0, c.cwiseProduct(c.transpose()).sum()));
}

void check_spd(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw ValidationError("metric must be a non-empty square matrix");
  if ((m - m.transpose()).norm() > 1e-10 * std::max(1.0, m.norm())) {
    throw ValidationError("metric must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 1e-14 * std::max(1.0, es.eigenvalues().maxCoeff())) {
    throw ValidationError("metric must be positive definite");
  }
}

}  // namespace

const char* to_string(VariableKind kind) {
  switch (kind) {
    case VariableKind::numeric:
      return "numeric";
    case VariableKind::categorical:
      return "categorical";
    case VariableKind::block:
      return "block";
  }
  return "unknown";
}

VariableStructure encode_numeric(const Vector& x, const Weights& w, std::string label) {
  const Vector c = center(x, w);
  const double v = w_dot(c, c, w);
  if (!(v > 0.0) || std::sqrt(v) <= 1e-14 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
    throw ValidationError("variable '" + label + "' has zero variance");
  }
  VariableStructure vs;
  vs.label = std::move(label);
  vs.kind = VariableKind::numeric;
  vs.data = c;
  vs.metric = Matrix::Constant(1, 1, 1.0 / v);
  vs.dim_weight = 1.0;
  return vs;
}

VariableStructure encode_categorical(std::span<const int> labels, const Weights& w, std::string label,
                                     int declared_levels) {
  const Index n = w.size();
  if (static_cast<Index>(labels.size()) != n) {
    throw ValidationError("categorical '" + label + "' length does not match the number of weights");
  }
  std::vector<int> order;
  std::unordered_map<int, int> slot;
  for (int id : labels) {
    if (declared_levels > 0 && (id < 0 || id >= declared_levels)) {
      throw ValidationError("categorical '" + label + "' has a level id outside the declared range");
    }
    if (slot.emplace(id, static_cast<int>(order.size())).second) order.push_back(id);
  }
  if (declared_levels > 0 && static_cast<int>(order.size()) != declared_levels) {
    throw ValidationError("categorical '" + label + "' has an empty level");
  }
  const auto m = static_cast<Index>(order.size());
  if (m < 2) throw ValidationError("categorical '" + label + "' needs at least two observed levels");

  Matrix ind = Matrix::Zero(n, m - 1);
  for (Index i = 0; i < n; ++i) {
    const int s = slot.at(labels[static_cast<std::size_t>(i)]);
    if (s < m - 1) ind(i, s) = 1.0;
  }
  VariableStructure vs;
  vs.label = std::move(label);
  vs.kind = VariableKind::categorical;
  vs.data = center_columns(ind, w);
  const Matrix gram = vs.data.transpose() * w.values().asDiagonal() * vs.data;
  vs.metric = gram.ldlt().solve(Matrix::Identity(m - 1, m - 1));
  vs.metric = 0.5 * (vs.metric + vs.metric.transpose());
  vs.levels = static_cast<int>(m);
  vs.dim_weight = 1.0 / std::sqrt(static_cast<double>(m - 1));
  return vs;
}

VariableStructure encode_block(const Matrix& x, const Matrix& metric, const Weights& w, std::string label) {
  if (x.rows() != w.size()) throw ValidationError("block '" + label + "' row count does not match the weights");
  if (metric.rows() != x.cols()) throw ValidationError("block '" + label + "' metric size does not match its columns");
  check_spd(metric);
  VariableStructure vs;
  vs.label = std::move(label);
  vs.kind = VariableKind::block;
  vs.data = center_columns(x, w);
  vs.metric = 0.5 * (metric + metric.transpose());
  const double norm = resultant_norm(vs.data, vs.metric, w);
  if (!(norm > 1e-300) || vs.data.norm() <= 1e-14 * std::max(1.0, x.norm())) {
    throw ValidationError("block '" + vs.label + "' is zero after centring");
  }
  vs.dim_weight = 1.0 / norm;
  return vs;
}

Resultant resultant(const VariableStructure& vs, const Weights& w, bool normed) {
  if (vs.data.rows() != w.size()) throw ValidationError("structure does not match the number of weights");
  if (vs.metric.rows() != vs.data.cols() || vs.metric.cols() != vs.data.cols()) {
    throw ValidationError("structure metric does not match its columns");
  }
  Resultant r;
  r.op = vs.data * vs.metric * vs.data.transpose() * w.values().asDiagonal();
  r.normed = normed;
  if (normed) {
    const double norm = std::sqrt(std::max(0.0, spsd_dot(r.op, r.op)));
    if (!(norm > 0.0)) throw NumericalError("resultant of '" + vs.label + "' has zero norm");
    r.op /= norm;
  }
  return r;
}

VariableStructure compound_structure(std::span<const VariableStructure> members, std::span<const double> omega,
                                     const Weights& w) {
  if (members.empty()) throw ValidationError("compound_structure needs at least one member");
  if (omega.size() != members.size()) throw ValidationError("one weight per member is required");
  double total = 0.0;
  for (double o : omega) {
    if (!(o >= 0.0)) throw ValidationError("member weights must be non-negative");
    total += o;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("member weights must sum to 1");

  Index cols = 0;
  for (const auto& m : members) cols += m.data.cols();
  Matrix block(w.size(), cols);
  Index at = 0;
  for (std::size_t h = 0; h < members.size(); ++h) {
    const auto& m = members[h];
    if (m.data.rows() != w.size()) throw ValidationError("member row count does not match the weights");
    const double scale = std::sqrt(omega[h] * m.dim_weight);
    block.middleCols(at, m.data.cols()) = scale * m.data * spd_sqrt(m.metric);
    at += m.data.cols();
  }
  VariableStructure vs;
  vs.label = "compound";
  vs.kind = VariableKind::block;
  vs.data = std::move(block);
  vs.metric = Matrix::Identity(cols, cols);
  const double norm = resultant_norm(vs.data, vs.metric, w);
  if (!(norm > 0.0)) throw NumericalError("compound structure has zero norm");
  vs.dim_weight = 1.0 / norm;
  return vs;
}

}  // namespace varclust
