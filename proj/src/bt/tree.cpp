#include "tpo/bt/tree.hpp"

namespace tpo::bt {

std::uint64_t ActionChannel::start(const BtNode& leaf) {
  ActionRequest req;
  req.type = ActionRequest::Type::Start;
  req.token = next_token_++;
  req.module = leaf.leaf_id;
  req.node_name = leaf.name;
  req.params = leaf.params;
  live_[req.token] = {req.module, req.node_name};
  queue_.push_back(std::move(req));
  return queue_.back().token;
}

void ActionChannel::abort(std::uint64_t token) {
  const auto it = live_.find(token);
  if (it == live_.end()) return;
  ActionRequest req;
  req.type = ActionRequest::Type::Abort;
  req.token = token;
  req.module = it->second.first;
  req.node_name = it->second.second;
  live_.erase(it);
  replies_.erase(token);
  queue_.push_back(std::move(req));
}

std::vector<ActionRequest> ActionChannel::drain() {
  std::vector<ActionRequest> out(std::make_move_iterator(queue_.begin()), std::make_move_iterator(queue_.end()));
  queue_.clear();
  return out;
}

void ActionChannel::reply(std::uint64_t token, Status status) {
  if (live_.count(token)) replies_[token] = status;
}

std::optional<Status> ActionChannel::take_reply(std::uint64_t token) {
  const auto it = replies_.find(token);
  if (it == replies_.end()) return std::nullopt;
  const Status s = it->second;
  replies_.erase(it);
  if (s != Status::Running) live_.erase(token);
  return s;
}

Tree::Tree(BtNode root, Environment& env, ActionChannel& channel)
    : root_(std::make_unique<BtNode>(std::move(root))), env_(env), channel_(channel) {
  root_->validate();
  nodes_.reserve(root_->size());
  build(*root_);
}

int Tree::build(const BtNode& def) {
  if (def.kind == NodeKind::Condition && !env_.knows_condition(def.leaf_id))
    throw LookupError("unknown condition '" + def.leaf_id + "'");
  if (def.kind == NodeKind::Action && !env_.knows_action(def.leaf_id))
    throw LookupError("unknown action '" + def.leaf_id + "'");
  const int index = static_cast<int>(nodes_.size());
  nodes_.push_back(RtNode{});
  nodes_[static_cast<std::size_t>(index)].def = &def;
  for (const auto& c : def.children) {
    const int child = build(c);
    nodes_[static_cast<std::size_t>(index)].children.push_back(child);
  }
  return index;
}

Status Tree::tick(Blackboard& bb) {
  for (auto& n : nodes_) n.last.reset();
  return tick_node(0, bb);
}

void Tree::halt() { halt_node(0); }

Status Tree::tick_node(int index, Blackboard& bb) {
  RtNode& n = nodes_[static_cast<std::size_t>(index)];
  const BtNode& d = *n.def;
  if (!d.pre_while.empty() && !bb.test(d.pre_while)) {
    halt_node(index);
    n.last = Status::Failure;
    return Status::Failure;
  }
  const Status s = tick_kind(n, bb);
  n.active = s == Status::Running;
  n.last = s;
  if (s == Status::Success && !d.post_on_success.empty()) bb.apply(d.post_on_success);
  return s;
}

Status Tree::tick_kind(RtNode& n, Blackboard& bb) {
  const BtNode& d = *n.def;
  const std::size_t count = n.children.size();
  switch (d.kind) {
    case NodeKind::Sequence:
    case NodeKind::Fallback: {
      const Status advance = d.kind == NodeKind::Sequence ? Status::Success : Status::Failure;
      for (std::size_t k = n.current; k < count; ++k) {
        const Status s = tick_node(n.children[k], bb);
        if (s == Status::Running) {
          n.current = k;
          return s;
        }
        if (s != advance) {
          n.current = 0;
          return s;
        }
      }
      n.current = 0;
      return advance;
    }
    case NodeKind::ReactiveSequence: {
      for (std::size_t k = 0; k < count; ++k) {
        const Status s = tick_node(n.children[k], bb);
        if (s != Status::Success) {
          halt_from(n, k + 1);
          return s;
        }
      }
      return Status::Success;
    }
    case NodeKind::Parallel: {
      if (n.results.size() != count) n.results.assign(count, std::nullopt);
      std::size_t successes = 0, failures = 0;
      for (std::size_t k = 0; k < count; ++k) {
        if (!n.results[k] || *n.results[k] == Status::Running) n.results[k] = tick_node(n.children[k], bb);
        successes += *n.results[k] == Status::Success;
        failures += *n.results[k] == Status::Failure;
      }
      const auto m = static_cast<std::size_t>(d.threshold);
      if (successes >= m || failures > count - m) {
        halt_from(n, 0);
        n.results.assign(count, std::nullopt);
        return successes >= m ? Status::Success : Status::Failure;
      }
      return Status::Running;
    }
    case NodeKind::InfiniteLoop:
      tick_node(n.children[0], bb);
      return Status::Running;
    case NodeKind::Condition:
      return env_.evaluate_condition(d, bb);
    case NodeKind::Action: {
      if (n.token == 0) {
        n.token = channel_.start(d);
        return Status::Running;
      }
      const auto reply = channel_.take_reply(n.token);
      if (!reply || *reply == Status::Running) return Status::Running;
      n.token = 0;
      return *reply;
    }
  }
  return Status::Failure;
}

void Tree::halt_node(int index) {
  RtNode& n = nodes_[static_cast<std::size_t>(index)];
  if (n.token != 0) {
    channel_.abort(n.token);
    n.token = 0;
  }
  halt_from(n, 0);
  n.current = 0;
  n.results.clear();
  n.active = false;
}

void Tree::halt_from(const RtNode& node, std::size_t first_child) {
  for (std::size_t k = first_child; k < node.children.size(); ++k) {
    if (nodes_[static_cast<std::size_t>(node.children[k])].active) halt_node(node.children[k]);
  }
}

std::vector<std::string> Tree::labels() const {
  std::vector<std::string> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) {
    if (!n.def->name.empty()) {
      out.push_back(n.def->name);
    } else if (!n.def->leaf_id.empty()) {
      out.push_back(n.def->leaf_id);
    } else {
      out.push_back(to_string(n.def->kind));
    }
  }
  return out;
}

std::vector<std::optional<Status>> Tree::last_statuses() const {
  std::vector<std::optional<Status>> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.last);
  return out;
}

std::vector<std::string> Tree::running_actions() const {
  std::vector<std::string> out;
  for (const auto& n : nodes_)
    if (n.token != 0) out.push_back(n.def->leaf_id);
  return out;
}

std::string Tree::status_code() const {
  std::string out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) {
    if (!n.last) {
      out.push_back('-');
    } else {
      out.push_back(*n.last == Status::Success ? 'S' : *n.last == Status::Failure ? 'F' : 'R');
    }
  }
  return out;
}

}  // namespace tpo::bt
