#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tpo/bt/blackboard.hpp"
#include "tpo/bt/node.hpp"

namespace tpo::bt {

struct ActionRequest {
  enum class Type { Start, Abort };
  Type type = Type::Start;
  std::uint64_t token = 0;
  std::string module;
  std::string node_name;
  Params params;
};

/// Ordered request queue from the tree to the controller plus the reply slots
/// going back. A reply posted during step k is consumed by the tick of step k+1.
class ActionChannel {
 public:
  std::uint64_t start(const BtNode& leaf);
  void abort(std::uint64_t token);

  /// Controller side: all requests issued since the last drain, in order.
  std::vector<ActionRequest> drain();
  /// Controller side: latest status of a started action. Replies for aborted
  /// or finished tokens are dropped.
  void reply(std::uint64_t token, Status status);

  /// Tree side: consumes the pending reply for `token`, if any.
  std::optional<Status> take_reply(std::uint64_t token);

  bool is_live(std::uint64_t token) const { return live_.count(token) != 0; }

 private:
  std::uint64_t next_token_ = 1;
  std::deque<ActionRequest> queue_;
  std::map<std::uint64_t, Status> replies_;
  std::map<std::uint64_t, std::pair<std::string, std::string>> live_;  // module, node name
};

/// Leaf evaluation hooks supplied by the host.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual bool knows_condition(const std::string& id) const = 0;
  virtual bool knows_action(const std::string& id) const = 0;
  virtual Status evaluate_condition(const BtNode& leaf, Blackboard& bb) = 0;
};

class Tree {
 public:
  /// Throws LookupError if a leaf id is unknown to `env`.
  Tree(BtNode root, Environment& env, ActionChannel& channel);

  Status tick(Blackboard& bb);
  /// Aborts every running action and resets all node memory.
  void halt();

  const BtNode& root() const { return *root_; }
  std::size_t size() const { return nodes_.size(); }
  /// Node labels in preorder: name, else leaf id, else kind.
  std::vector<std::string> labels() const;
  /// Status reported by each node during the most recent tick; nullopt if not ticked.
  std::vector<std::optional<Status>> last_statuses() const;
  /// Module ids of actions that currently hold a live start.
  std::vector<std::string> running_actions() const;
  /// Compact per-node string: S, F, R or '-' for not ticked.
  std::string status_code() const;

 private:
  struct RtNode {
    const BtNode* def = nullptr;
    std::vector<int> children;
    std::size_t current = 0;
    std::vector<std::optional<Status>> results;
    std::uint64_t token = 0;
    bool active = false;
    std::optional<Status> last;
  };

  int build(const BtNode& def);
  Status tick_node(int index, Blackboard& bb);
  Status tick_kind(RtNode& node, Blackboard& bb);
  void halt_node(int index);
  void halt_from(const RtNode& node, std::size_t first_child);

  std::unique_ptr<BtNode> root_;
  Environment& env_;
  ActionChannel& channel_;
  std::vector<RtNode> nodes_;
};

}  // namespace tpo::bt
