#include "syntonize/topology.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include "syntonize/error.hpp"

namespace syntonize {

namespace {

std::size_t pair_count(int n)
{
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
}

// Uniform draw over the absent pairs of g. Rejection sampling while the graph
// is sparse, explicit enumeration once it is dense.
Edge random_absent_pair(const NetworkGraph& g, Rng& rng)
{
    const int n = g.size();
    const std::size_t absent = pair_count(n) - g.edge_count();
    if (absent * 4 >= pair_count(n)) {
        std::uniform_int_distribution<int> node(0, n - 1);
        for (;;) {
            const int a = node(rng);
            const int b = node(rng);
            if (a != b && !g.has_edge(a, b))
                return Edge(a, b);
        }
    }
    std::vector<Edge> candidates;
    candidates.reserve(absent);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (!g.has_edge(a, b))
                candidates.emplace_back(a, b);
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    return candidates[pick(rng)];
}

} // namespace

// ---------------------------------------------------------------------------
// NetworkGraph

NetworkGraph::NetworkGraph(int n)
{
    if (n < 1)
        throw Error(ErrorCode::InvalidArgument, "graph needs at least one node");
    adjacency_.resize(static_cast<std::size_t>(n));
}

NetworkGraph::NetworkGraph(int n, std::span<const Edge> edges) : NetworkGraph(n)
{
    for (const Edge& e : edges)
        add_edge(e.i, e.j);
}

void NetworkGraph::check_node(int i) const
{
    if (i < 0 || i >= size())
        throw Error(ErrorCode::InvalidArgument,
                    "node index " + std::to_string(i) + " out of range for n=" + std::to_string(size()));
}

bool NetworkGraph::has_edge(int i, int j) const
{
    check_node(i);
    check_node(j);
    const auto& nb = adjacency_[i];
    return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<Edge> NetworkGraph::edges() const
{
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (int i = 0; i < size(); ++i)
        for (int j : adjacency_[i])
            if (i < j)
                out.emplace_back(i, j);
    return out;
}

void NetworkGraph::add_edge(int i, int j)
{
    check_node(i);
    check_node(j);
    if (i == j)
        throw Error(ErrorCode::SelfLoop, "self-loop at node " + std::to_string(i));
    if (has_edge(i, j))
        throw Error(ErrorCode::AlreadyConnected,
                    "edge (" + std::to_string(i) + "," + std::to_string(j) + ") already present");
    auto insert_sorted = [](std::vector<int>& v, int x) { v.insert(std::upper_bound(v.begin(), v.end(), x), x); };
    insert_sorted(adjacency_[i], j);
    insert_sorted(adjacency_[j], i);
    ++edge_count_;
}

void NetworkGraph::remove_edge(int i, int j)
{
    if (!has_edge(i, j))
        throw Error(ErrorCode::NotAnEdge, "(" + std::to_string(i) + "," + std::to_string(j) + ") is not an edge");
    auto erase = [](std::vector<int>& v, int x) { v.erase(std::lower_bound(v.begin(), v.end(), x)); };
    erase(adjacency_[i], j);
    erase(adjacency_[j], i);
    --edge_count_;
}

// ---------------------------------------------------------------------------
// Graph queries and generation

double connectivity_ratio(const NetworkGraph& g)
{
    if (g.size() < 2)
        return 0.0;
    return static_cast<double>(g.edge_count()) / static_cast<double>(pair_count(g.size()));
}

std::size_t target_edge_count(int n, double r)
{
    return static_cast<std::size_t>(std::llround(r * static_cast<double>(pair_count(n))));
}

double feasible_ratio(int n, double r)
{
    return std::max(r, 2.0 / static_cast<double>(n));
}

bool is_connected(const NetworkGraph& g)
{
    const int n = g.size();
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v : g.neighbors(u)) {
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                frontier.push(v);
            }
        }
    }
    return reached == n;
}

std::vector<Edge> bridges(const NetworkGraph& g)
{
    // Iterative Tarjan low-link over every component.
    const int n = g.size();
    std::vector<int> order(n, -1), low(n, 0), parent(n, -1);
    std::vector<std::size_t> next_child(n, 0);
    std::vector<Edge> out;
    int clock = 0;
    std::vector<int> stack;
    for (int root = 0; root < n; ++root) {
        if (order[root] >= 0)
            continue;
        order[root] = low[root] = clock++;
        stack.push_back(root);
        while (!stack.empty()) {
            const int u = stack.back();
            const auto& nb = g.neighbors(u);
            if (next_child[u] < nb.size()) {
                const int v = nb[next_child[u]++];
                if (order[v] < 0) {
                    parent[v] = u;
                    order[v] = low[v] = clock++;
                    stack.push_back(v);
                } else if (v != parent[u]) {
                    low[u] = std::min(low[u], order[v]);
                }
                continue;
            }
            stack.pop_back();
            const int p = parent[u];
            if (p >= 0) {
                low[p] = std::min(low[p], low[u]);
                if (low[u] > order[p])
                    out.emplace_back(p, u);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

NetworkGraph generate_connected_graph(int n, double r, Rng& rng)
{
    if (n < 2)
        throw Error(ErrorCode::InvalidArgument, "need n >= 2, got " + std::to_string(n));
    if (!(r > 0.0 && r <= 1.0))
        throw Error(ErrorCode::InvalidRatio, "connectivity ratio must lie in (0,1], got " + std::to_string(r));
    const std::size_t m = target_edge_count(n, r);
    if (m < static_cast<std::size_t>(n - 1))
        throw Error(ErrorCode::InsufficientEdges, "round(r*n(n-1)/2) = " + std::to_string(m) +
                                                      " edges cannot connect " + std::to_string(n) + " nodes");

    std::vector<int> label(static_cast<std::size_t>(n));
    std::iota(label.begin(), label.end(), 0);
    for (int k = n - 1; k > 0; --k) {
        std::uniform_int_distribution<int> pick(0, k);
        std::swap(label[k], label[pick(rng)]);
    }

    NetworkGraph g(n);
    for (int k = 1; k < n; ++k) {
        std::uniform_int_distribution<int> attach(0, k - 1);
        g.add_edge(label[k], label[attach(rng)]);
    }
    while (g.edge_count() < m) {
        const Edge e = random_absent_pair(g, rng);
        g.add_edge(e.i, e.j);
    }
    return g;
}

NetworkGraph generate_connected_graph(int n, double r, std::uint64_t seed)
{
    Rng rng = make_rng(seed);
    return generate_connected_graph(n, r, rng);
}

// ---------------------------------------------------------------------------
// MixingMatrix

MixingMatrix::MixingMatrix(Eigen::MatrixXd w) : w_(std::move(w))
{
    if (w_.rows() != w_.cols())
        throw Error(ErrorCode::DimensionMismatch, "mixing matrix must be square");
    if (w_.rows() < 1)
        throw Error(ErrorCode::InvalidArgument, "mixing matrix must be non-empty");
}

MixingMatrix MixingMatrix::identity(int n)
{
    return MixingMatrix(Eigen::MatrixXd::Identity(n, n));
}

std::vector<std::string> invariant_violations(const MixingMatrix& w, const NetworkGraph& g, double tol)
{
    std::vector<std::string> out;
    const int n = w.size();
    if (n != g.size()) {
        out.push_back("matrix size " + std::to_string(n) + " != graph size " + std::to_string(g.size()));
        return out;
    }
    const Eigen::MatrixXd& m = w.matrix();
    for (int i = 0; i < n; ++i) {
        const double row = m.row(i).sum();
        const double col = m.col(i).sum();
        if (std::abs(row - 1.0) >= tol)
            out.push_back("row " + std::to_string(i) + " sums to " + std::to_string(row));
        if (std::abs(col - 1.0) >= tol)
            out.push_back("column " + std::to_string(i) + " sums to " + std::to_string(col));
        if (!(m(i, i) > 0.0))
            out.push_back("diagonal entry " + std::to_string(i) + " is not positive");
        for (int j = 0; j < n; ++j) {
            if (m(i, j) != m(j, i))
                out.push_back("asymmetric pair (" + std::to_string(i) + "," + std::to_string(j) + ")");
            if (m(i, j) < 0.0)
                out.push_back("negative entry (" + std::to_string(i) + "," + std::to_string(j) + ")");
            if (i != j && m(i, j) != 0.0 && !g.has_edge(i, j))
                out.push_back("weight on non-edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
        }
    }
    return out;
}

NetworkGraph support_graph(const MixingMatrix& w)
{
    NetworkGraph g(w.size());
    for (int i = 0; i < w.size(); ++i)
        for (int j = i + 1; j < w.size(); ++j)
            if (w(i, j) != 0.0 || w(j, i) != 0.0)
                g.add_edge(i, j);
    return g;
}

MixingMatrix build_mixing_matrix(const NetworkGraph& g)
{
    if (!is_connected(g))
        throw Error(ErrorCode::DisconnectedGraph, "mixing matrix requires a connected graph");
    const int n = g.size();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (const Edge& e : g.edges()) {
        const double weight = 1.0 / (1.0 + std::max(g.degree(e.i), g.degree(e.j)));
        w(e.i, e.j) = weight;
        w(e.j, e.i) = weight;
    }
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j : g.neighbors(i))
            off += w(i, j);
        w(i, i) = 1.0 - off;
    }
    return MixingMatrix(std::move(w));
}

double second_eigenvalue(const MixingMatrix& w)
{
    const int n = w.size();
    if (n < 2)
        return 0.0;
    const Eigen::MatrixXd deflated = w.matrix().array() - 1.0 / n;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(deflated, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double second_eigenvalue_magnitude(const Eigen::MatrixXd& m)
{
    const auto n = m.rows();
    if (n != m.cols())
        throw Error(ErrorCode::DimensionMismatch, "square matrix required");
    if (n < 2)
        return 0.0;
    const Eigen::MatrixXd deflated = m.array() - 1.0 / static_cast<double>(n);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(deflated, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

MixingMatrix remove_edge_weights_unchecked(MixingMatrix w, int i, int j)
{
    Eigen::MatrixXd& m = w.w_;
    m(i, i) += m(i, j);
    m(j, j) += m(j, i);
    m(i, j) = 0.0;
    m(j, i) = 0.0;
    return w;
}

MixingMatrix add_edge_weights_unchecked(MixingMatrix w, int i, int j)
{
    Eigen::MatrixXd& m = w.w_;
    const double weight = kAddedEdgeFraction * std::min(m(i, i), m(j, j));
    m(i, i) -= weight;
    m(j, j) -= weight;
    m(i, j) = weight;
    m(j, i) = weight;
    return w;
}

MixingMatrix remove_edge_weights(MixingMatrix w, int i, int j)
{
    NetworkGraph g = support_graph(w);
    if (i == j || !g.has_edge(i, j))
        throw Error(ErrorCode::NotAnEdge, "(" + std::to_string(i) + "," + std::to_string(j) + ") is not an edge");
    g.remove_edge(i, j);
    if (!is_connected(g))
        throw Error(ErrorCode::WouldDisconnect,
                    "removing (" + std::to_string(i) + "," + std::to_string(j) + ") disconnects the network");
    return remove_edge_weights_unchecked(std::move(w), i, j);
}

MixingMatrix add_edge_weights(MixingMatrix w, int i, int j)
{
    if (i < 0 || j < 0 || i >= w.size() || j >= w.size())
        throw Error(ErrorCode::InvalidArgument, "node index out of range");
    if (i == j)
        throw Error(ErrorCode::SelfLoop, "cannot add self-loop at node " + std::to_string(i));
    if (w(i, j) != 0.0)
        throw Error(ErrorCode::AlreadyConnected,
                    "(" + std::to_string(i) + "," + std::to_string(j) + ") is already an edge");
    return add_edge_weights_unchecked(std::move(w), i, j);
}

// ---------------------------------------------------------------------------
// Topology mutation

std::string_view to_string(MutationKind kind)
{
    switch (kind) {
    case MutationKind::None: return "none";
    case MutationKind::Add: return "add";
    case MutationKind::Remove: return "remove";
    }
    return "none";
}

MutationProbabilities MutationProbabilities::from_no_change(double p1)
{
    return {p1, (1.0 - p1) / 2.0, (1.0 - p1) / 2.0};
}

TopologyUpdate mutate_topology(MixingMatrix w, NetworkGraph g, const MutationProbabilities& p, Rng& rng)
{
    if (w.size() != g.size())
        throw Error(ErrorCode::DimensionMismatch, "matrix and graph sizes differ");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double alpha = unit(rng);
    if (alpha < p.no_change)
        return {std::move(w), std::move(g), MutationKind::None};

    if (alpha < p.no_change + p.remove) {
        const std::vector<Edge> bridge = bridges(g);
        std::vector<Edge> removable;
        for (const Edge& e : g.edges())
            if (!std::binary_search(bridge.begin(), bridge.end(), e))
                removable.push_back(e);
        if (removable.empty())
            return {std::move(w), std::move(g), MutationKind::None};
        std::uniform_int_distribution<std::size_t> pick(0, removable.size() - 1);
        const Edge e = removable[pick(rng)];
        g.remove_edge(e.i, e.j);
        return {remove_edge_weights_unchecked(std::move(w), e.i, e.j), std::move(g), MutationKind::Remove};
    }

    if (g.edge_count() == pair_count(g.size()))
        return {std::move(w), std::move(g), MutationKind::None};
    const Edge e = random_absent_pair(g, rng);
    g.add_edge(e.i, e.j);
    return {add_edge_weights_unchecked(std::move(w), e.i, e.j), std::move(g), MutationKind::Add};
}

TopologyUpdate mutate_topology(MixingMatrix w, NetworkGraph g, double p1, Rng& rng)
{
    return mutate_topology(std::move(w), std::move(g), MutationProbabilities::from_no_change(p1), rng);
}

// ---------------------------------------------------------------------------
// Serialization

void write_edge_list(std::ostream& os, const NetworkGraph& g)
{
    os << g.size() << ' ' << g.edge_count() << '\n';
    for (const Edge& e : g.edges())
        os << e.i << ' ' << e.j << '\n';
}

NetworkGraph read_edge_list(std::istream& is)
{
    long long n = 0, m = 0;
    if (!(is >> n >> m) || n < 1 || m < 0)
        throw Error(ErrorCode::Parse, "edge list header must be \"n m\"");
    NetworkGraph g(static_cast<int>(n));
    for (long long k = 0; k < m; ++k) {
        int i = 0, j = 0;
        if (!(is >> i >> j))
            throw Error(ErrorCode::Parse, "edge list truncated at edge " + std::to_string(k));
        g.add_edge(i, j);
    }
    return g;
}

void write_mixing_csv(std::ostream& os, const MixingMatrix& w)
{
    const auto old_precision = os.precision(17);
    for (int i = 0; i < w.size(); ++i) {
        for (int j = 0; j < w.size(); ++j) {
            if (j)
                os << ',';
            os << w(i, j);
        }
        os << '\n';
    }
    os.precision(old_precision);
}

MixingMatrix read_mixing_csv(std::istream& is)
{
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw Error(ErrorCode::Parse, "bad matrix entry \"" + cell + "\"");
            }
        }
        rows.push_back(std::move(row));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (n == 0)
        throw Error(ErrorCode::Parse, "empty matrix");
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != n)
            throw Error(ErrorCode::DimensionMismatch, "row " + std::to_string(i) + " has wrong length");
        for (Eigen::Index j = 0; j < n; ++j)
            m(i, j) = rows[i][j];
    }
    return MixingMatrix(std::move(m));
}

} // namespace syntonize
