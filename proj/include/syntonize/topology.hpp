#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "syntonize/rng.hpp"

namespace syntonize {

/// Unordered node pair, stored with i < j.
struct Edge {
    int i = 0;
    int j = 0;

    Edge() = default;
    Edge(int a, int b) : i(a < b ? a : b), j(a < b ? b : a) {}

    auto operator<=>(const Edge&) const = default;
};

/// Undirected communication graph on nodes 0..n-1. No self-loops, no
/// duplicate edges.
class NetworkGraph {
public:
    explicit NetworkGraph(int n);
    NetworkGraph(int n, std::span<const Edge> edges);

    int size() const noexcept { return static_cast<int>(adjacency_.size()); }
    std::size_t edge_count() const noexcept { return edge_count_; }
    bool has_edge(int i, int j) const;
    int degree(int i) const { return static_cast<int>(adjacency_.at(i).size()); }
    /// Sorted neighbour list of node i.
    const std::vector<int>& neighbors(int i) const { return adjacency_.at(i); }
    /// Lexicographically sorted edge list.
    std::vector<Edge> edges() const;

    // Throw SelfLoop / AlreadyConnected / NotAnEdge on contract violations.
    void add_edge(int i, int j);
    void remove_edge(int i, int j);

    friend bool operator==(const NetworkGraph&, const NetworkGraph&) = default;

private:
    void check_node(int i) const;

    std::vector<std::vector<int>> adjacency_;
    std::size_t edge_count_ = 0;
};

/// m / (n(n-1)/2).
double connectivity_ratio(const NetworkGraph& g);

/// Number of edges a graph on n nodes gets at ratio r: round(r * n(n-1)/2),
/// halves rounded away from zero.
std::size_t target_edge_count(int n, double r);

/// Smallest ratio at which an n-node graph can be connected, i.e. 2/n.
/// Returns max(r, 2/n) so sweeps can keep small networks feasible.
double feasible_ratio(int n, double r);

bool is_connected(const NetworkGraph& g);

/// Edges whose removal disconnects the graph.
std::vector<Edge> bridges(const NetworkGraph& g);

/// Random spanning tree (uniform attachment after a random relabelling) plus
/// uniformly sampled extra edges up to round(r * n(n-1)/2).
NetworkGraph generate_connected_graph(int n, double r, Rng& rng);
NetworkGraph generate_connected_graph(int n, double r, std::uint64_t seed);

/// Symmetric doubly stochastic consensus weights with the sparsity of a graph.
class MixingMatrix {
public:
    /// Wraps w as-is; only squareness is checked. Use invariant_violations()
    /// to audit an externally constructed matrix.
    explicit MixingMatrix(Eigen::MatrixXd w);

    static MixingMatrix identity(int n);

    int size() const noexcept { return static_cast<int>(w_.rows()); }
    double operator()(int i, int j) const { return w_(i, j); }
    const Eigen::MatrixXd& matrix() const noexcept { return w_; }

    friend bool operator==(const MixingMatrix& a, const MixingMatrix& b)
    {
        return a.w_.rows() == b.w_.rows() && a.w_ == b.w_;
    }

private:
    friend MixingMatrix remove_edge_weights_unchecked(MixingMatrix, int, int);
    friend MixingMatrix add_edge_weights_unchecked(MixingMatrix, int, int);

    Eigen::MatrixXd w_;
};

/// Human-readable descriptions of every broken MixingMatrix invariant
/// (symmetry, row/column sums within tol, sparsity against g, nonnegative
/// entries, positive diagonal). Empty when the matrix is valid.
std::vector<std::string> invariant_violations(const MixingMatrix& w, const NetworkGraph& g,
                                              double tol = 1e-12);

/// Graph of nonzero off-diagonal entries.
NetworkGraph support_graph(const MixingMatrix& w);

/// Metropolis-Hastings weights: w_ij = 1 / (1 + max(deg_i, deg_j)) on edges,
/// the diagonal takes the remainder of each row.
MixingMatrix build_mixing_matrix(const NetworkGraph& g);

/// Second-largest eigenvalue magnitude of a symmetric mixing matrix, computed
/// as the spectral radius of W - 11^T/n.
double second_eigenvalue(const MixingMatrix& w);

/// Same quantity for an arbitrary doubly stochastic matrix (e.g. a product
/// of two mixing matrices), via a general eigensolve.
double second_eigenvalue_magnitude(const Eigen::MatrixXd& m);

/// Moves w_ij onto both diagonals and zeroes the pair. Throws NotAnEdge when
/// w_ij == 0 and WouldDisconnect when (i,j) is a bridge of the support graph.
MixingMatrix remove_edge_weights(MixingMatrix w, int i, int j);

/// Opens edge (i,j) with weight 0.2 * min(w_ii, w_jj) taken from both
/// diagonals. Throws SelfLoop or AlreadyConnected.
MixingMatrix add_edge_weights(MixingMatrix w, int i, int j);

// Variants without the precondition checks, for callers that already track
// the graph (mutate_topology).
MixingMatrix remove_edge_weights_unchecked(MixingMatrix w, int i, int j);
MixingMatrix add_edge_weights_unchecked(MixingMatrix w, int i, int j);

inline constexpr double kAddedEdgeFraction = 0.2;

enum class MutationKind { None, Add, Remove };

std::string_view to_string(MutationKind kind);

/// Branch probabilities of one topology update: <no change, add, remove>.
struct MutationProbabilities {
    double no_change = 1.0;
    double add = 0.0;
    double remove = 0.0;

    /// <p1, (1-p1)/2, (1-p1)/2>.
    static MutationProbabilities from_no_change(double p1);

    bool operator==(const MutationProbabilities&) const = default;
};

struct TopologyUpdate {
    MixingMatrix w;
    NetworkGraph g;
    MutationKind kind = MutationKind::None;
};

/// One random topology change. A uniform draw a in [0,1) selects: a < no_change
/// keeps the matrix, the next `remove` mass removes a uniformly chosen
/// non-bridge edge, the rest adds a uniformly chosen absent pair. Infeasible
/// branches (tree for remove, complete graph for add) leave the matrix as is.
TopologyUpdate mutate_topology(MixingMatrix w, NetworkGraph g, const MutationProbabilities& p,
                               Rng& rng);
TopologyUpdate mutate_topology(MixingMatrix w, NetworkGraph g, double p1, Rng& rng);

// Edge list: "n m" then m lines "i j", 0-based.
void write_edge_list(std::ostream& os, const NetworkGraph& g);
NetworkGraph read_edge_list(std::istream& is);

// n rows of n comma-separated values, 17 significant digits.
void write_mixing_csv(std::ostream& os, const MixingMatrix& w);
MixingMatrix read_mixing_csv(std::istream& is);

} // namespace syntonize
