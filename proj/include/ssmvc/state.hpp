#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"
#include "ssmvc/mvc.hpp"
#include "ssmvc/rng.hpp"

namespace ssmvc {

class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON view of a node's protocol state. Keys are sorted, so dump().dump() is canonical.
//
//   proposal, latched_same_value
//   brb.{init,valid}.<k>.{my_init,echoed,readied,delivered,echoes,readies}
//   bv.{my_value,received,relayed,bin_values}
//   bc.{active,proposal,round,est,decision,rounds,decides}
//
// Payloads are {"k":origin,"v":token}, {"k":origin,"x":flag} or {"hex":"..."}.
// The epoch tag is owned by the recycler and is reported but never loaded.
nlohmann::json dump_state(const MvcNode& node);

// Replaces the whole protocol state. Throws StateError if the document is not a well-typed
// state for this node's n; the node is left untouched in that case.
void load_state(MvcNode& node, const nlohmann::json& doc);

// Sets one field by dotted path, e.g. "brb.valid.5.delivered". New keys are accepted only
// inside maps (vote maps, rounds).
void set_state_field(MvcNode& node, std::string_view dotted_path, const nlohmann::json& value);

// Draws every field from its representable domain, illegal combinations included.
void randomize_state(MvcNode& node, Rng& rng);

nlohmann::json payload_to_json(const Bytes& payload);
Bytes payload_from_json(const nlohmann::json& j);

}  // namespace ssmvc
