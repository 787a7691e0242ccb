#pragma once

#include <stdexcept>
#include <vector>

#include "ssmvc/simnet.hpp"

namespace ssmvc {

class RecycleError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Idealized epoch oracle with a global view of the correct nodes. It stands in for the
// recycling layer that the consensus objects assume underneath them.
class Recycler {
 public:
  explicit Recycler(SimWorld& world) : world_(world) {}

  // Every correct node's result() has left Pending. Works for both stacks.
  bool completed() const;
  // Starts the next epoch: every object back to its post-recycling state, older envelopes
  // purged. Rejected unless completed().
  void recycle();

  std::vector<NodeId> correct_nodes() const;

 private:
  SimWorld& world_;
};

bool is_correct(const SimWorld& world, NodeId id);
std::optional<Outcome<Value>> result_of(const SimWorld& world, NodeId id);

}  // namespace ssmvc
