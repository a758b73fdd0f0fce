#pragma once

#include "numerics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace gabp {

using AgentId = int;

// One agent: x_i of dimension N_i with prior N(0, W_i). Prior means are fixed
// to zero throughout.
struct Agent {
    AgentId id = 0;
    int dim = 0;
    Matrix prior_cov;  // W_i, N_i x N_i
};

// One shared observation y_ij = coef_i*x_i + coef_j*x_j + noise, stored once
// per unordered pair with i < j. Double-subscript names like A_{j,i} for the
// matrix multiplying x_i invite an index-order trap; the coef_i/coef_j names
// exist to kill it.
struct EdgeObservation {
    AgentId i = 0;
    AgentId j = 0;
    Vector obs;        // y_ij, length m_ij
    Matrix coef_i;     // m_ij x N_i
    Matrix coef_j;     // m_ij x N_j
    Matrix noise_cov;  // R_ij, m_ij x m_ij
};

// Directed message slot: the factor of `edge` paired with one endpoint.
// Slot s names both the factor->variable message (f_e -> agent) and the
// variable->factor message (agent -> f_e); both stacks use this one order.
struct DirectedMessage {
    int edge = 0;
    AgentId agent = 0;
    friend bool operator==(const DirectedMessage&, const DirectedMessage&) = default;
};

class PairwiseModel {
  public:
    PairwiseModel() = default;

    // Stores the data as given (normalizing only the edge sort order, which is
    // part of the type) and builds lookup tables defensively so that validate()
    // can inspect malformed inputs instead of the constructor rejecting them.
    PairwiseModel(std::vector<Agent> agents, std::vector<EdgeObservation> edges)
        : agents_(std::move(agents)), edges_(std::move(edges)) {
        std::sort(edges_.begin(), edges_.end(), [](const EdgeObservation& a, const EdgeObservation& b) {
            return std::pair(a.i, a.j) < std::pair(b.i, b.j);
        });
        rebuild_tables();
    }

    [[nodiscard]] int num_agents() const { return static_cast<int>(agents_.size()); }
    [[nodiscard]] int num_edges() const { return static_cast<int>(edges_.size()); }
    [[nodiscard]] const std::vector<Agent>& agents() const { return agents_; }
    [[nodiscard]] const std::vector<EdgeObservation>& edges() const { return edges_; }
    [[nodiscard]] const Agent& agent(AgentId i) const { return agents_.at(static_cast<size_t>(i)); }
    [[nodiscard]] const EdgeObservation& edge(int e) const { return edges_.at(static_cast<size_t>(e)); }
    [[nodiscard]] int dim(AgentId i) const { return agent(i).dim; }

    [[nodiscard]] const std::vector<AgentId>& neighbors(AgentId i) const {
        if (i < 0 || i >= num_agents()) throw std::out_of_range("neighbors: unknown agent id");
        return adjacency_[static_cast<size_t>(i)];
    }

    // Edge index for the unordered pair {a,b}, or -1.
    [[nodiscard]] int edge_between(AgentId a, AgentId b) const {
        if (a < 0 || a >= num_agents()) return -1;
        for (size_t n = 0; n < adjacency_[static_cast<size_t>(a)].size(); ++n)
            if (adjacency_[static_cast<size_t>(a)][n] == b) return incident_[static_cast<size_t>(a)][n];
        return -1;
    }

    // Edge indices incident to agent i, aligned with neighbors(i).
    [[nodiscard]] const std::vector<int>& incident_edges(AgentId i) const {
        if (i < 0 || i >= num_agents()) throw std::out_of_range("incident_edges: unknown agent id");
        return incident_[static_cast<size_t>(i)];
    }

    // Canonical directed-message order: ascending by agent, then by the other
    // endpoint. Every stacked object (message state, C blocks, Q, b) uses it.
    [[nodiscard]] const std::vector<DirectedMessage>& directed_messages() const { return slots_; }

    // Slot index of (edge e, agent a), or -1.
    [[nodiscard]] int slot_of(int e, AgentId a) const {
        for (size_t s = 0; s < slots_.size(); ++s)
            if (slots_[s].edge == e && slots_[s].agent == a) return static_cast<int>(s);
        return -1;
    }

    // Slot indices whose agent is i (one per incident edge), aligned with
    // neighbors(i).
    [[nodiscard]] const std::vector<int>& slots_of_agent(AgentId i) const {
        if (i < 0 || i >= num_agents()) throw std::out_of_range("slots_of_agent: unknown agent id");
        return agent_slots_[static_cast<size_t>(i)];
    }

    [[nodiscard]] AgentId other_end(int e, AgentId a) const {
        const auto& ed = edge(e);
        return ed.i == a ? ed.j : ed.i;
    }

    // Coefficient of agent a's variable on edge e.
    [[nodiscard]] const Matrix& coef_of(int e, AgentId a) const {
        const auto& ed = edge(e);
        return ed.i == a ? ed.coef_i : ed.coef_j;
    }

  private:
    void rebuild_tables() {
        const int m = num_agents();
        adjacency_.assign(static_cast<size_t>(m), {});
        incident_.assign(static_cast<size_t>(m), {});
        for (int e = 0; e < num_edges(); ++e) {
            const auto& ed = edges_[static_cast<size_t>(e)];
            if (ed.i >= 0 && ed.i < m && ed.j >= 0 && ed.j < m && ed.i != ed.j) {
                adjacency_[static_cast<size_t>(ed.i)].push_back(ed.j);
                incident_[static_cast<size_t>(ed.i)].push_back(e);
                adjacency_[static_cast<size_t>(ed.j)].push_back(ed.i);
                incident_[static_cast<size_t>(ed.j)].push_back(e);
            }
        }
        slots_.clear();
        agent_slots_.assign(static_cast<size_t>(m), {});
        for (AgentId a = 0; a < m; ++a) {
            // sort agent a's (neighbor, edge) pairs by neighbor id
            auto& nbr = adjacency_[static_cast<size_t>(a)];
            auto& inc = incident_[static_cast<size_t>(a)];
            std::vector<std::pair<AgentId, int>> order;
            order.reserve(nbr.size());
            for (size_t n = 0; n < nbr.size(); ++n) order.emplace_back(nbr[n], inc[n]);
            std::sort(order.begin(), order.end());
            for (size_t n = 0; n < order.size(); ++n) {
                nbr[n] = order[n].first;
                inc[n] = order[n].second;
                agent_slots_[static_cast<size_t>(a)].push_back(static_cast<int>(slots_.size()));
                slots_.push_back({order[n].second, a});
            }
        }
    }

    std::vector<Agent> agents_;
    std::vector<EdgeObservation> edges_;
    std::vector<std::vector<AgentId>> adjacency_;
    std::vector<std::vector<int>> incident_;
    std::vector<DirectedMessage> slots_;
    std::vector<std::vector<int>> agent_slots_;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

// Total over malformed finite inputs: violations come back as data, the
// function itself never throws on bad numbers (NaN/Inf included).
inline std::vector<std::string> validate(const PairwiseModel& model) {
    std::vector<std::string> out;
    const int m = model.num_agents();
    if (m == 0) {
        out.emplace_back("model has no agents");
        return out;
    }
    for (int a = 0; a < m; ++a) {
        const Agent& ag = model.agents()[static_cast<size_t>(a)];
        const std::string who = "agent " + std::to_string(ag.id);
        if (ag.id != a) out.push_back(who + ": ids must be dense 0..M-1 in order (found at position " + std::to_string(a) + ")");
        if (ag.dim < 1) {
            out.push_back(who + ": dim must be >= 1");
            continue;
        }
        if (ag.prior_cov.rows() != ag.dim || ag.prior_cov.cols() != ag.dim) {
            out.push_back(who + ": prior_cov shape does not match dim");
            continue;
        }
        if (!ag.prior_cov.allFinite()) {
            out.push_back(who + ": prior_cov has non-finite entries");
            continue;
        }
        if (!numerics::is_symmetric(ag.prior_cov)) out.push_back(who + ": prior_cov not symmetric");
        else if (Eigen::LLT<Matrix>(ag.prior_cov).info() != Eigen::Success)
            out.push_back(who + ": prior_cov not positive definite");
    }
    std::set<std::pair<AgentId, AgentId>> seen;
    for (int e = 0; e < model.num_edges(); ++e) {
        const EdgeObservation& ed = model.edges()[static_cast<size_t>(e)];
        const std::string who = "edge {" + std::to_string(ed.i) + "," + std::to_string(ed.j) + "}";
        if (ed.i < 0 || ed.i >= m || ed.j < 0 || ed.j >= m) {
            out.push_back(who + ": endpoint out of range");
            continue;
        }
        if (!(ed.i < ed.j)) {
            out.push_back(who + ": requires i < j");
            continue;
        }
        if (!seen.insert({ed.i, ed.j}).second) out.push_back(who + ": duplicate edge for this pair");
        const int ni = model.agents()[static_cast<size_t>(ed.i)].dim;
        const int nj = model.agents()[static_cast<size_t>(ed.j)].dim;
        const auto mij = ed.obs.size();
        if (ed.coef_i.rows() != mij || ed.coef_j.rows() != mij || ed.noise_cov.rows() != mij ||
            ed.noise_cov.cols() != mij || ed.coef_i.cols() != ni || ed.coef_j.cols() != nj) {
            out.push_back(who + ": inconsistent dimensions among obs/coef_i/coef_j/noise_cov");
            continue;
        }
        if (!ed.obs.allFinite() || !ed.coef_i.allFinite() || !ed.coef_j.allFinite() || !ed.noise_cov.allFinite()) {
            out.push_back(who + ": non-finite entries");
            continue;
        }
        if (!numerics::is_symmetric(ed.noise_cov)) out.push_back(who + ": noise_cov not symmetric");
        else if (Eigen::LLT<Matrix>(ed.noise_cov).info() != Eigen::Success)
            out.push_back(who + ": noise_cov not positive definite");
        if (!numerics::full_column_rank(ed.coef_i)) out.push_back(who + ": coef_i not full column rank");
        if (!numerics::full_column_rank(ed.coef_j)) out.push_back(who + ": coef_j not full column rank");
    }
    // connectivity over well-formed edges
    if (m > 0) {
        std::vector<char> reach(static_cast<size_t>(m), 0);
        std::vector<AgentId> stack{0};
        reach[0] = 1;
        while (!stack.empty()) {
            const AgentId u = stack.back();
            stack.pop_back();
            for (AgentId v : model.neighbors(u))
                if (v >= 0 && v < m && !reach[static_cast<size_t>(v)]) {
                    reach[static_cast<size_t>(v)] = 1;
                    stack.push_back(v);
                }
        }
        if (std::count(reach.begin(), reach.end(), char(1)) != m) out.emplace_back("graph not connected");
    }
    return out;
}

// Longest shortest path in the communication graph (0 for a single agent).
// BFS per agent; fine at desk scale.
inline int graph_diameter(const PairwiseModel& model) {
    const int m = model.num_agents();
    int diameter = 0;
    std::vector<int> dist(static_cast<size_t>(m));
    std::vector<AgentId> queue;
    for (AgentId s = 0; s < m; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        queue.assign(1, s);
        dist[static_cast<size_t>(s)] = 0;
        for (size_t head = 0; head < queue.size(); ++head) {
            const AgentId u = queue[head];
            for (AgentId v : model.neighbors(u))
                if (dist[static_cast<size_t>(v)] < 0) {
                    dist[static_cast<size_t>(v)] = dist[static_cast<size_t>(u)] + 1;
                    diameter = std::max(diameter, dist[static_cast<size_t>(v)]);
                    queue.push_back(v);
                }
        }
    }
    return diameter;
}

// Throwing convenience used by code whose precondition is a valid model.
inline void require_valid(const PairwiseModel& model, const char* context) {
    auto report = validate(model);
    if (!report.empty())
        throw std::invalid_argument(std::string(context) + ": invalid model: " + report.front());
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------
// File format (matrices are row-major arrays of arrays):
// {"agents":[{"id":0,"dim":1,"prior_cov":[[1.0]]},...],
//  "edges":[{"i":0,"j":1,"obs":[1.0],"coef_i":[[1.0]],"coef_j":[[1.0]],
//            "noise_cov":[[1.0]]},...]}

using json = nlohmann::ordered_json;

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index r = 0; r < v.size(); ++r) out.push_back(v(r));
    return out;
}

inline Matrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix: expected non-empty array of arrays");
    const auto rows = j.size();
    const auto cols = j.at(0).size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t r = 0; r < rows; ++r) {
        const auto& row = j.at(r);
        if (!row.is_array() || row.size() != cols) throw std::invalid_argument("matrix: ragged rows");
        for (size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row.at(c).get<double>();
    }
    return m;
}

inline Vector vector_from_json(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("vector: expected array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (size_t r = 0; r < j.size(); ++r) v(static_cast<Eigen::Index>(r)) = j.at(r).get<double>();
    return v;
}

inline json model_to_json(const PairwiseModel& model) {
    json out;
    out["agents"] = json::array();
    for (const Agent& a : model.agents()) {
        json ja;
        ja["id"] = a.id;
        ja["dim"] = a.dim;
        ja["prior_cov"] = matrix_to_json(a.prior_cov);
        out["agents"].push_back(std::move(ja));
    }
    out["edges"] = json::array();
    for (const EdgeObservation& e : model.edges()) {
        json je;
        je["i"] = e.i;
        je["j"] = e.j;
        je["obs"] = vector_to_json(e.obs);
        je["coef_i"] = matrix_to_json(e.coef_i);
        je["coef_j"] = matrix_to_json(e.coef_j);
        je["noise_cov"] = matrix_to_json(e.noise_cov);
        out["edges"].push_back(std::move(je));
    }
    return out;
}

inline PairwiseModel model_from_json(const json& j) {
    std::vector<Agent> agents;
    for (const auto& ja : j.at("agents")) {
        Agent a;
        a.id = ja.at("id").get<int>();
        a.dim = ja.at("dim").get<int>();
        a.prior_cov = matrix_from_json(ja.at("prior_cov"));
        agents.push_back(std::move(a));
    }
    std::vector<EdgeObservation> edges;
    if (j.contains("edges"))
        for (const auto& je : j.at("edges")) {
            EdgeObservation e;
            e.i = je.at("i").get<int>();
            e.j = je.at("j").get<int>();
            e.obs = vector_from_json(je.at("obs"));
            e.coef_i = matrix_from_json(je.at("coef_i"));
            e.coef_j = matrix_from_json(je.at("coef_j"));
            e.noise_cov = matrix_from_json(je.at("noise_cov"));
            edges.push_back(std::move(e));
        }
    return PairwiseModel(std::move(agents), std::move(edges));
}

inline void save_model(const PairwiseModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_model: cannot open " + path);
    out << model_to_json(model).dump(2) << '\n';
}

inline PairwiseModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_model: cannot open " + path);
    json j = json::parse(in);
    return model_from_json(j);
}

}  // namespace gabp
