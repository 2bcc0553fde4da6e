#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/pairgen.hpp"
#include "core/results.hpp"

namespace authdrift {

inline constexpr std::string_view kProtocolVersion = "verify/1";

struct VerifyRequest {
  std::string sample_id;
  std::string text1;
  std::string text2;
};

struct VerifyResponse {
  std::string sample_id;
  int label = 0;
  double confidence = 0.0;
};

// Single-line JSON encodings used on the wire.
std::string EncodeRequest(const VerifyRequest& request);
VerifyRequest DecodeRequest(std::string_view line);
std::string EncodeResponse(const VerifyResponse& response);
// Throws Error(kProtocol) on malformed lines, labels other than 0/1 and
// confidences outside [0, 1].
VerifyResponse DecodeResponse(std::string_view line);
std::string HandshakeLine();

struct EndpointOptions {
  // Exactly one of these: a shell command speaking the protocol on its
  // standard streams, or an HTTP base URL serving POST /verify.
  std::string command;
  std::string url;
  double timeout_seconds = 300.0;  // longest wait for progress on in-flight requests
  std::size_t window = 64;         // maximum in-flight requests
};

// One response per request, returned in request order whatever the arrival
// order. Unknown, duplicate or missing sample ids are protocol errors.
std::vector<VerifyResponse> RunSession(std::span<const VerifyRequest> requests,
                                       const EndpointOptions& options);

std::vector<VerifyRequest> MakeRequests(const PairDataset& dataset);

// score is the implied probability of label 1.
std::vector<VerificationResult> RunExternal(const PairDataset& dataset, const EndpointOptions& options);

}  // namespace authdrift
