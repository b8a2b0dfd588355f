#pragma once

#include "treactor/errors.hpp"
#include "treactor/tag.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace treactor {

using ReactorId = uint32_t;
using PortId = uint32_t;
using ActionId = uint32_t;
using ReactionId = uint32_t;
using Payload = std::vector<uint8_t>;

class ReactionContext;
using ReactionBody = std::function<void(ReactionContext&)>;

/// Bound relating logical to physical time. Violated when the reaction is
/// dispatched after physical time strictly exceeds tag + bound; the handler
/// then runs instead of the normal body.
struct DeadlineSpec {
    Duration bound;
    ReactionBody handler;
};

struct ReactionDecl {
    std::string name;
    std::vector<PortId> port_triggers;
    std::vector<ActionId> action_triggers;
    std::vector<PortId> effects;
    ReactionBody body;
    std::optional<DeadlineSpec> deadline;
    Duration cost{}; // simulated compute time consumed by one invocation
};

enum class PortKind : uint8_t { Input, Output };

struct PortDecl {
    ReactorId reactor = 0;
    PortKind kind = PortKind::Input;
    std::string name;
    // filled in by connect()/finalization
    std::optional<PortId> upstream;    // inputs: at most one
    std::vector<PortId> downstream;    // outputs: fan-out
    std::vector<ReactionId> triggers;  // reactions triggered by this port
};

struct ActionDecl {
    ReactorId reactor = 0;
    std::string name;
    std::vector<ReactionId> triggers;
};

struct ReactorDecl {
    std::string name;
    std::vector<ReactionId> reactions; // in declaration order
};

/// Static topology: reactors, ports, actions, reactions, connections.
/// Built once, then treated as immutable by the scheduler.
class ReactorGraph {
public:
    ReactorId add_reactor(std::string name) {
        reactors_.push_back({std::move(name), {}});
        return static_cast<ReactorId>(reactors_.size() - 1);
    }

    PortId add_input(ReactorId r, std::string name) { return add_port(r, PortKind::Input, std::move(name)); }
    PortId add_output(ReactorId r, std::string name) { return add_port(r, PortKind::Output, std::move(name)); }

    ActionId add_action(ReactorId r, std::string name) {
        actions_.push_back({r, std::move(name), {}});
        return static_cast<ActionId>(actions_.size() - 1);
    }

    ReactionId add_reaction(ReactorId r, ReactionDecl decl) {
        auto id = static_cast<ReactionId>(reactions_.size());
        for (PortId p : decl.port_triggers) ports_[p].triggers.push_back(id);
        for (ActionId a : decl.action_triggers) actions_[a].triggers.push_back(id);
        reaction_owner_.push_back(r);
        reactors_[r].reactions.push_back(id);
        reactions_.push_back(std::move(decl));
        return id;
    }

    /// Zero-delay connection from an output port to an input port.
    void connect(PortId out, PortId in) {
        if (ports_[out].kind != PortKind::Output || ports_[in].kind != PortKind::Input)
            throw std::logic_error("connect() requires output -> input");
        if (ports_[in].upstream)
            throw std::logic_error("input port '" + ports_[in].name + "' already connected");
        ports_[in].upstream = out;
        ports_[out].downstream.push_back(in);
    }

    size_t num_reactions() const { return reactions_.size(); }
    size_t num_ports() const { return ports_.size(); }
    size_t num_actions() const { return actions_.size(); }
    size_t num_reactors() const { return reactors_.size(); }

    const ReactionDecl& reaction(ReactionId r) const { return reactions_[r]; }
    ReactorId owner(ReactionId r) const { return reaction_owner_[r]; }
    const PortDecl& port(PortId p) const { return ports_[p]; }
    const ActionDecl& action(ActionId a) const { return actions_[a]; }
    const ReactorDecl& reactor(ReactorId r) const { return reactors_[r]; }

private:
    PortId add_port(ReactorId r, PortKind k, std::string name) {
        ports_.push_back({r, k, std::move(name), {}, {}, {}});
        return static_cast<PortId>(ports_.size() - 1);
    }

    std::vector<ReactorDecl> reactors_;
    std::vector<PortDecl> ports_;
    std::vector<ActionDecl> actions_;
    std::vector<ReactionDecl> reactions_;
    std::vector<ReactorId> reaction_owner_;
};

/// Acyclic precedence graph over reactions, plus a canonical topological
/// linearization and per-reaction depth levels for parallel dispatch.
struct Apg {
    std::vector<std::vector<ReactionId>> succ; // adjacency, per reaction
    std::vector<std::vector<ReactionId>> pred;
    std::vector<ReactionId> topo_order;        // canonical: Kahn, min-id first
    std::vector<uint32_t> topo_index;          // position of each reaction in topo_order
    std::vector<uint32_t> level;               // longest-path depth

    bool precedes(ReactionId a, ReactionId b) const; // reflexive-transitive reachability
};

/// Derives the precedence relation: declaration order within a reactor, and
/// writer-before-reader across zero-delay connections. Throws
/// CyclicDependency (naming one cycle) if the relation is not a DAG.
Apg build_apg(const ReactorGraph& graph);

} // namespace treactor
