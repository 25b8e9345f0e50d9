#pragma once

// Label matrices and argmax decoding of soft labels.

#include "green_ssl/core.hpp"
#include "green_ssl/dataio.hpp"

#include <string>
#include <vector>

namespace green_ssl {

enum class LabelEncoding {
  pm1,     // +1 for the true class, -1 for the others
  onehot,  // 1 for the true class, 0 for the others
};

inline const char* to_string(LabelEncoding e) {
  return e == LabelEncoding::pm1 ? "pm1" : "onehot";
}

inline LabelEncoding parse_encoding(const std::string& s) {
  if (s == "pm1") return LabelEncoding::pm1;
  if (s == "onehot") return LabelEncoding::onehot;
  throw ConfigError("unknown label encoding '" + s + "' (expected pm1 or onehot)");
}

/// n x c supervision matrix Y. Rows of unlabeled samples are zero.
struct LabelMatrix {
  Matrix values;
  LabelEncoding encoding = LabelEncoding::pm1;
  Index labeled_count = 0;

  Index rows() const { return values.rows(); }
  Index classes() const { return values.cols(); }
};

/// Soft label matrix F (n x c); row i scores sample i against every class.
using SoftLabels = Matrix;

inline LabelMatrix encode(const LabeledSplit& split, Index n, int c,
                          LabelEncoding encoding = LabelEncoding::pm1) {
  require(c >= 1, "encode: class count must be >= 1");
  LabelMatrix y;
  y.encoding = encoding;
  y.values = Matrix::Zero(n, c);
  y.labeled_count = split.labeled_count();
  const double negative = encoding == LabelEncoding::pm1 ? -1.0 : 0.0;
  for (std::size_t j = 0; j < split.labeled_indices.size(); ++j) {
    const Index i = split.labeled_indices[j];
    const ClassId label = split.labels[j];
    if (i < 0 || i >= n) throw DataError("encode: labeled index out of range");
    if (label < 1 || label > c)
      throw DataError("encode: label " + std::to_string(label) + " exceeds class count " +
                      std::to_string(c));
    y.values.row(i).setConstant(negative);
    y.values(i, label - 1) = 1.0;
  }
  return y;
}

/// Row-wise argmax as 1-based class ids; ties go to the lowest class.
inline std::vector<ClassId> predict(const SoftLabels& f) {
  require(f.cols() >= 1, "predict: need at least one class column");
  if (!f.allFinite()) throw NumericError("predict: soft labels contain non-finite values");
  std::vector<ClassId> out(static_cast<std::size_t>(f.rows()));
  for (Index i = 0; i < f.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < f.cols(); ++j)
      if (f(i, j) > f(i, best)) best = j;
    out[static_cast<std::size_t>(i)] = static_cast<ClassId>(best + 1);
  }
  return out;
}

}  // namespace green_ssl
