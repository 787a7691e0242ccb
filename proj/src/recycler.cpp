#include "ssmvc/recycler.hpp"

#include "ssmvc/mvc.hpp"
#include "ssmvc/reference.hpp"

namespace ssmvc {

bool is_correct(const SimWorld& world, NodeId id) {
  return world.process_as<MvcNode>(id) || world.process_as<ReferenceNode>(id);
}

std::optional<Outcome<Value>> result_of(const SimWorld& world, NodeId id) {
  if (const auto* m = world.process_as<MvcNode>(id)) return m->result();
  if (const auto* r = world.process_as<ReferenceNode>(id)) return r->result();
  return std::nullopt;
}

std::vector<NodeId> Recycler::correct_nodes() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < world_.params().n; ++i)
    if (is_correct(world_, NodeId{i})) out.emplace_back(i);
  return out;
}

bool Recycler::completed() const {
  for (std::size_t i = 0; i < world_.params().n; ++i) {
    const auto r = result_of(world_, NodeId{i});
    if (r && r->is_pending()) return false;
  }
  return true;
}

void Recycler::recycle() {
  if (!completed()) throw RecycleError("recycle requested before every correct node completed");
  world_.advance_epoch(world_.epoch() + 1);
}

}  // namespace ssmvc
