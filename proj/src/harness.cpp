#include "fedrep/harness.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace fedrep {

namespace {

Instance draw_gaussian_2class(const DatasetSpec& spec,
                              const std::vector<double>& direction,
                              RngStream& rng) {
  Instance inst;
  inst.y = rng.next_double() < 0.5 ? -1.0 : 1.0;
  inst.x.resize(spec.feature_dim);
  for (int j = 0; j < spec.feature_dim; ++j) {
    inst.x[j] = inst.y * spec.margin * direction[j] +
                spec.noise * rng.next_gaussian();
  }
  return inst;
}

Instance draw_quadratic(const DatasetSpec& spec,
                        const std::vector<double>& center, RngStream& rng) {
  Instance inst;
  inst.x.resize(spec.feature_dim);
  for (int j = 0; j < spec.feature_dim; ++j) {
    inst.x[j] = center[j] + spec.noise * rng.next_gaussian();
  }
  return inst;
}

std::vector<Instance> load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open csv file: " + path);
  std::vector<Instance> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<double> fields;
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        fields.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("csv: non-numeric cell '" + cell + "'");
      }
    }
    if (fields.size() < 2) throw ConfigError("csv: need >= 2 columns");
    Instance inst;
    inst.y = fields.back();
    fields.pop_back();
    inst.x = std::move(fields);
    if (!rows.empty() && rows.front().x.size() != inst.x.size()) {
      throw ConfigError("csv: ragged rows");
    }
    rows.push_back(std::move(inst));
  }
  if (rows.empty()) throw ConfigError("csv: empty file");
  return rows;
}

}  // namespace

Dataset generate_dataset(const DatasetSpec& spec, std::uint32_t m,
                         RngStream& rng) {
  spec.validate();
  Dataset out;
  out.feature_dim = spec.feature_dim;
  out.shards.resize(m);

  if (spec.kind == DatasetKind::kCsvTable) {
    auto rows = load_csv(spec.csv_path);
    out.feature_dim = static_cast<int>(rows.front().x.size());
    const std::size_t need =
        static_cast<std::size_t>(m) * spec.n_per_client + spec.heldout_n;
    if (rows.size() < need) {
      throw ConfigError("csv: need at least " + std::to_string(need) +
                        " rows");
    }
    const auto order = rng.permutation(static_cast<std::uint32_t>(rows.size()));
    std::size_t pos = 0;
    for (std::uint32_t k = 0; k < m; ++k) {
      for (int i = 0; i < spec.n_per_client; ++i) {
        out.shards[k].push_back(rows[order[pos++]]);
      }
    }
    for (int i = 0; i < spec.heldout_n; ++i) {
      out.heldout.push_back(rows[order[pos++]]);
    }
    return out;
  }

  // shared generator parameters drawn first, then instances in a fixed
  // order so the partition is reproducible
  std::vector<double> anchor(spec.feature_dim);
  if (spec.kind == DatasetKind::kGaussian2Class) {
    double norm_sq = 0.0;
    for (double& a : anchor) {
      a = rng.next_gaussian();
      norm_sq += a * a;
    }
    const double norm = std::sqrt(norm_sq);
    for (double& a : anchor) a /= norm;
  } else {
    for (double& a : anchor) a = spec.margin * rng.next_gaussian();
  }

  for (std::uint32_t k = 0; k < m; ++k) {
    out.shards[k].reserve(spec.n_per_client);
    for (int i = 0; i < spec.n_per_client; ++i) {
      out.shards[k].push_back(spec.kind == DatasetKind::kGaussian2Class
                                  ? draw_gaussian_2class(spec, anchor, rng)
                                  : draw_quadratic(spec, anchor, rng));
    }
  }
  out.heldout.reserve(spec.heldout_n);
  for (int i = 0; i < spec.heldout_n; ++i) {
    out.heldout.push_back(spec.kind == DatasetKind::kGaussian2Class
                              ? draw_gaussian_2class(spec, anchor, rng)
                              : draw_quadratic(spec, anchor, rng));
  }
  return out;
}

std::size_t Model::param_count() const {
  switch (objective) {
    case Objective::kQuadraticCenter:
      return static_cast<std::size_t>(feature_dim);
    case Objective::kLeastSquares:
    case Objective::kLogistic:
      return static_cast<std::size_t>(feature_dim) + 1;
    case Objective::kMlpLogistic:
      // W1 (h x f), b1 (h), w2 (h), b2 (1)
      return static_cast<std::size_t>(hidden_width) * feature_dim +
             2 * static_cast<std::size_t>(hidden_width) + 1;
  }
  return 0;
}

Model build_model(const ModelSpec& spec, const DatasetSpec& data,
                  std::uint32_t d) {
  spec.validate();
  Model model;
  model.spec = spec;
  model.feature_dim = data.feature_dim;
  model.hidden_width = spec.hidden_width;

  if (data.kind == DatasetKind::kQuadratic) {
    if (spec.kind != ModelKind::kLinearRegression) {
      throw ConfigError(
          "synthetic_quadratic pairs with the linear_regression model");
    }
    model.objective = Objective::kQuadraticCenter;
  } else {
    switch (spec.kind) {
      case ModelKind::kLinearRegression:
        model.objective = Objective::kLeastSquares;
        break;
      case ModelKind::kLogisticRegression:
        model.objective = Objective::kLogistic;
        break;
      case ModelKind::kMlp1Hidden:
        model.objective = Objective::kMlpLogistic;
        break;
    }
  }
  if (model.param_count() != d) {
    throw ConfigError("model parameter count " +
                      std::to_string(model.param_count()) +
                      " does not match configured d = " + std::to_string(d));
  }
  return model;
}

DenseVector init_weights(const Model& model, RngStream& rng) {
  const std::size_t d = model.param_count();
  if (model.spec.init_scale == 0.0) return DenseVector::zeros(d);
  std::vector<double> w(d);
  for (double& x : w) x = model.spec.init_scale * rng.next_gaussian();
  return DenseVector(std::move(w));
}

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// logistic loss log(1 + exp(-yz)), numerically stable for large |z|
inline double logistic_loss(double y, double z) {
  const double t = -y * z;
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double instance_loss_grad(const Model& model, const DenseVector& w,
                          const Instance& inst, DenseVector& grad) {
  const int f = model.feature_dim;
  switch (model.objective) {
    case Objective::kQuadraticCenter: {
      double loss = 0.0;
      for (int j = 0; j < f; ++j) {
        const double diff = w[j] - inst.x[j];
        loss += 0.5 * diff * diff;
        grad[j] += diff;
      }
      return loss;
    }
    case Objective::kLeastSquares: {
      double z = w[f];  // bias
      for (int j = 0; j < f; ++j) z += w[j] * inst.x[j];
      const double resid = z - inst.y;
      for (int j = 0; j < f; ++j) grad[j] += resid * inst.x[j];
      grad[f] += resid;
      return 0.5 * resid * resid;
    }
    case Objective::kLogistic: {
      double z = w[f];
      for (int j = 0; j < f; ++j) z += w[j] * inst.x[j];
      const double coeff = -inst.y * sigmoid(-inst.y * z);
      for (int j = 0; j < f; ++j) grad[j] += coeff * inst.x[j];
      grad[f] += coeff;
      return logistic_loss(inst.y, z);
    }
    case Objective::kMlpLogistic: {
      const int h = model.hidden_width;
      // layout: W1 row-major (h x f) | b1 (h) | w2 (h) | b2
      const std::size_t off_b1 = static_cast<std::size_t>(h) * f;
      const std::size_t off_w2 = off_b1 + h;
      const std::size_t off_b2 = off_w2 + h;
      std::vector<double> hidden(h);
      double z = w[off_b2];
      for (int i = 0; i < h; ++i) {
        double a = w[off_b1 + i];
        for (int j = 0; j < f; ++j) {
          a += w[static_cast<std::size_t>(i) * f + j] * inst.x[j];
        }
        hidden[i] = std::tanh(a);
        z += w[off_w2 + i] * hidden[i];
      }
      const double dz = -inst.y * sigmoid(-inst.y * z);
      grad[off_b2] += dz;
      for (int i = 0; i < h; ++i) {
        grad[off_w2 + i] += dz * hidden[i];
        const double da = dz * w[off_w2 + i] * (1.0 - hidden[i] * hidden[i]);
        grad[off_b1 + i] += da;
        for (int j = 0; j < f; ++j) {
          grad[static_cast<std::size_t>(i) * f + j] += da * inst.x[j];
        }
      }
      return logistic_loss(inst.y, z);
    }
  }
  throw std::invalid_argument("loss_and_grad: bad objective");
}

double predict_logit(const Model& model, const DenseVector& w,
                     const Instance& inst) {
  const int f = model.feature_dim;
  if (model.objective == Objective::kLogistic ||
      model.objective == Objective::kLeastSquares) {
    double z = w[f];
    for (int j = 0; j < f; ++j) z += w[j] * inst.x[j];
    return z;
  }
  const int h = model.hidden_width;
  const std::size_t off_b1 = static_cast<std::size_t>(h) * f;
  const std::size_t off_w2 = off_b1 + h;
  double z = w[off_w2 + h];
  for (int i = 0; i < h; ++i) {
    double a = w[off_b1 + i];
    for (int j = 0; j < f; ++j) {
      a += w[static_cast<std::size_t>(i) * f + j] * inst.x[j];
    }
    z += w[off_w2 + i] * std::tanh(a);
  }
  return z;
}

}  // namespace

double loss_and_grad(const Model& model, const DenseVector& w,
                     const std::vector<Instance>& pool,
                     const std::vector<std::uint32_t>& indices,
                     DenseVector& grad_out) {
  if (pool.empty()) throw std::invalid_argument("loss_and_grad: empty batch");
  if (w.dim() != model.param_count()) {
    throw std::invalid_argument("loss_and_grad: dimension mismatch");
  }
  grad_out = DenseVector::zeros(w.dim());
  double loss = 0.0;
  const std::size_t n = indices.empty() ? pool.size() : indices.size();
  if (indices.empty()) {
    for (const Instance& inst : pool) {
      loss += instance_loss_grad(model, w, inst, grad_out);
    }
  } else {
    for (std::uint32_t i : indices) {
      loss += instance_loss_grad(model, w, pool[i], grad_out);
    }
  }
  grad_out.scale(1.0 / static_cast<double>(n));
  return loss / static_cast<double>(n);
}

EvalResult evaluate(const Model& model, const DenseVector& w,
                    const std::vector<Instance>& data) {
  EvalResult res;
  DenseVector scratch;
  res.loss = loss_and_grad(model, w, data, {}, scratch);
  if (model.objective == Objective::kLogistic ||
      model.objective == Objective::kMlpLogistic) {
    std::size_t correct = 0;
    for (const Instance& inst : data) {
      const double z = predict_logit(model, w, inst);
      if ((z >= 0.0 && inst.y > 0.0) || (z < 0.0 && inst.y < 0.0)) ++correct;
    }
    res.accuracy = static_cast<double>(correct) / data.size();
  }
  return res;
}

}  // namespace fedrep
