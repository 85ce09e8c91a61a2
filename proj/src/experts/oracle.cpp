// SPDX-License-Identifier: Apache-2.0
#include "inform/experts/oracle.hpp"

namespace inform {

OracleOutput oracle_respond(const PromptInstance& prompt) { return OracleOutput{prompt.target}; }

}  // namespace inform
