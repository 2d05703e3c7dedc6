#pragma once

#include <string>

#include "bforge/builder.hpp"
#include "bforge/diagnostics.hpp"
#include "bforge/moment.hpp"
#include "bforge/numrange.hpp"
#include "bforge/pinching.hpp"

namespace bforge {

inline constexpr const char* kSchemaTag = "blaschke-forge/1";

// Complex numbers are always serialized as [re, im] pairs; bare reals are
// accepted on input.

Operator operator_from_json(const std::string& text);
ConvexRegion region_from_json(const std::string& text);

// {"points": [z, ...]} or a bare list; entries scalars or [re, im].
std::vector<Vec> targets_from_json(const std::string& text, int tuple_len = 1);
std::vector<double> reals_from_json(const std::string& text);
TailSequence sequence_from_json(const std::string& text);
std::vector<Matrix> blocks_from_json(const std::string& text);

std::string frame_to_json(const Frame& f);
Frame frame_from_json(const std::string& text);

std::string certificate_to_json(const Certificate& c);
Certificate certificate_from_json(const std::string& text);

std::string plan_to_json(const PinchingPlan& p,
                         const std::vector<ConvexCombinationLedger>* ledgers = nullptr);
PinchingPlan plan_from_json(const std::string& text);

std::string moment_to_json(const MomentDecomposition& d);
std::string boundary_to_csv(const std::vector<BoundarySample>& samples);
std::string ledger_to_json(const ConvexCombinationLedger& led);

}  // namespace bforge
