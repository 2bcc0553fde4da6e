#pragma once

#include <string>

namespace authdrift {

// One classifier decision on one pair sample.
struct VerificationResult {
  std::string sample_id;
  int truth = 0;
  int label = 0;
  double score = 0.0;       // probability-like support for label 1
  double confidence = 0.5;  // support for the predicted label
};

}  // namespace authdrift
