#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "efgraph/error.hpp"
#include "efgraph/rng.hpp"
#include "efgraph/timeseries.hpp"

namespace efgraph {

struct StateTemplate {
  Eigen::MatrixXd covariance;
  std::string name;
};

/// Unit-diagonal correlation template: `within` for pairs sharing a block,
/// `between` otherwise. Throws unless the result is positive definite.
inline StateTemplate block_template(Eigen::Index n, const std::vector<std::vector<Eigen::Index>>& blocks,
                                    double within, double between, std::string name = "template") {
  if (n < 1) {
    throw Error("template needs at least one node");
  }
  if (!(between > -1.0) || !(between < within) || !(within <= 1.0)) {
    throw Error("block template needs -1 < between < within <= 1");
  }
  std::vector<int> block_of(static_cast<std::size_t>(n), -1);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (Eigen::Index i : blocks[b]) {
      if (i < 0 || i >= n) {
        throw Error("block index " + std::to_string(i) + " out of range for " + std::to_string(n) + " nodes");
      }
      if (block_of[static_cast<std::size_t>(i)] >= 0) {
        throw Error("node " + std::to_string(i) + " appears in more than one block");
      }
      block_of[static_cast<std::size_t>(i)] = static_cast<int>(b);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (block_of[static_cast<std::size_t>(i)] < 0) {
      throw Error("blocks do not cover node " + std::to_string(i));
    }
  }

  StateTemplate t;
  t.name = std::move(name);
  t.covariance.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) {
        t.covariance(i, j) = 1.0;
      } else {
        t.covariance(i, j) =
            block_of[static_cast<std::size_t>(i)] == block_of[static_cast<std::size_t>(j)] ? within : between;
      }
    }
  }
  const double min_eigen = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t.covariance, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .minCoeff();
  if (!(min_eigen > 0.0)) {
    std::ostringstream msg;
    msg << "block template is not positive definite (minimum eigenvalue " << min_eigen << ")";
    throw Error(msg.str());
  }
  return t;
}

struct DwellSegment {
  std::size_t template_index = 0;
  Eigen::Index length = 0;
};

struct SyntheticDataset {
  TimeSeriesMatrix ts;
  std::vector<int> true_labels;  // template index per row
  std::vector<StateTemplate> templates;
  std::uint64_t seed = 0;
};

/// Piecewise-stationary Gaussian data. Each dwell segment draws rows
/// x = S z + sigma e with S the symmetric square root of its template's
/// covariance and z, e independent standard normals. The first `n_eeg`
/// columns are tagged EEG, the rest FMRI. Output depends only on the
/// arguments: normals come from SeededRng in row-major order (z then e).
inline SyntheticDataset generate_dataset(const std::vector<StateTemplate>& templates,
                                         const std::vector<DwellSegment>& dwells, Eigen::Index n_eeg,
                                         Eigen::Index n_fmri, double noise_sigma, std::uint64_t seed,
                                         double dt = 2.0) {
  const Eigen::Index n = n_eeg + n_fmri;
  if (templates.empty()) {
    throw Error("at least one template is required");
  }
  if (n_eeg < 0 || n_fmri < 0 || n < 1) {
    throw Error("node counts must be non-negative with at least one node");
  }
  if (!(noise_sigma >= 0.0)) {
    throw Error("noise sigma must be non-negative");
  }
  std::vector<Eigen::MatrixXd> roots;
  for (const auto& t : templates) {
    if (t.covariance.rows() != n || t.covariance.cols() != n) {
      throw Error("template '" + t.name + "' is " + std::to_string(t.covariance.rows()) + "x" +
                  std::to_string(t.covariance.cols()) + " but the dataset has " + std::to_string(n) + " nodes");
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t.covariance);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) {
      throw Error("template '" + t.name + "' is not positive definite");
    }
    roots.push_back(eig.operatorSqrt());
  }

  Eigen::Index total = 0;
  for (const auto& d : dwells) {
    if (d.template_index >= templates.size()) {
      throw Error("dwell refers to template " + std::to_string(d.template_index) + " but only " +
                  std::to_string(templates.size()) + " exist");
    }
    if (d.length < 1) {
      throw Error("dwell lengths must be at least 1");
    }
    total += d.length;
  }

  SyntheticDataset out;
  out.templates = templates;
  out.seed = seed;
  out.ts.values.resize(total, n);
  out.ts.dt = dt;
  out.true_labels.reserve(static_cast<std::size_t>(total));
  for (Eigen::Index c = 0; c < n; ++c) {
    const bool eeg = c < n_eeg;
    std::ostringstream label;
    label << (eeg ? "E" : "F") << (eeg ? c : c - n_eeg) + 1;
    out.ts.labels.push_back(label.str());
    out.ts.modalities.push_back(eeg ? Modality::Eeg : Modality::Fmri);
  }

  SeededRng rng(seed);
  Eigen::VectorXd z(n);
  Eigen::Index row = 0;
  for (const auto& d : dwells) {
    const Eigen::MatrixXd& root = roots[d.template_index];
    for (Eigen::Index r = 0; r < d.length; ++r, ++row) {
      for (Eigen::Index c = 0; c < n; ++c) {
        z(c) = rng.normal();
      }
      Eigen::VectorXd x = root * z;
      for (Eigen::Index c = 0; c < n; ++c) {
        x(c) += noise_sigma * rng.normal();
      }
      out.ts.values.row(row) = x.transpose();
      out.true_labels.push_back(static_cast<int>(d.template_index));
    }
  }
  return out;
}

/// `count` templates over n nodes: template s couples the s-th contiguous
/// group of nodes with correlation `within` and leaves the rest independent.
/// Each state thus raises the strength of a different node group.
inline std::vector<StateTemplate> planted_templates(Eigen::Index n, int count, double within = 0.7) {
  if (count < 1 || n < count) {
    throw Error("need 1 <= templates <= nodes");
  }
  std::vector<StateTemplate> out;
  for (int s = 0; s < count; ++s) {
    const Eigen::Index begin = n * s / count;
    const Eigen::Index end = n * (s + 1) / count;
    std::vector<std::vector<Eigen::Index>> blocks;
    std::vector<Eigen::Index> group;
    for (Eigen::Index i = begin; i < end; ++i) {
      group.push_back(i);
    }
    blocks.push_back(group);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i < begin || i >= end) {
        blocks.push_back({i});
      }
    }
    out.push_back(block_template(n, blocks, within, 0.0, "state" + std::to_string(s)));
  }
  return out;
}

}  // namespace efgraph
