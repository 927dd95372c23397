#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gsos {

/// Which family of discrete groups an element lives in.
///
/// Abelian covers Z^d, products of cyclic groups, and mixed cases: one
/// modulus per coordinate, with modulus 0 meaning an infinite (Z) factor.
/// Free is the free group on `free_rank` generators, with elements stored
/// as reduced words.
enum class GroupKind { Abelian, Free };

struct GroupDescriptor {
    GroupKind kind = GroupKind::Abelian;
    std::vector<std::int64_t> moduli;  // Abelian only; 0 = infinite factor
    int free_rank = 0;                 // Free only

    static GroupDescriptor free_abelian(int d);
    static GroupDescriptor cyclic_product(std::vector<std::int64_t> m);
    static GroupDescriptor abelian(std::vector<std::int64_t> m);  // mixed moduli
    static GroupDescriptor free_group(int rank);

    bool operator==(const GroupDescriptor&) const = default;
    bool is_abelian() const { return kind == GroupKind::Abelian; }
    bool is_finite() const;
    std::string describe() const;
};

/// Element of a group in canonical form.
///
/// Abelian: coordinate tuple, residues reduced into [0, m_i) where m_i > 0.
/// Free: reduced word as signed generator indices (+g / -g for g, g^-1),
/// with no adjacent cancelling pair.
struct GroupElement {
    GroupDescriptor desc;
    std::vector<std::int64_t> data;

    bool operator==(const GroupElement&) const = default;
};

GroupElement identity(const GroupDescriptor& d);
GroupElement abelian_element(const GroupDescriptor& d, std::vector<std::int64_t> coords);
GroupElement free_word(const GroupDescriptor& d, std::vector<std::int64_t> letters);
bool is_canonical_word(const std::vector<std::int64_t>& letters, int rank);

GroupElement multiply(const GroupElement& a, const GroupElement& b);
GroupElement inverse(const GroupElement& a);
bool is_identity(const GroupElement& a);

/// Strict ordering used for every canonical element listing (abelian:
/// lexicographic; free: length, then lexicographic).
bool element_less(const GroupElement& a, const GroupElement& b);
std::string to_string(const GroupElement& a);
std::size_t element_hash(const GroupElement& a);

struct ElementLess {
    bool operator()(const GroupElement& a, const GroupElement& b) const { return element_less(a, b); }
};

/// Finite ordered subset Sigma of a group; the stored order indexes the
/// rows/columns of every Toeplitz lift built over it.
struct SubsetSigma {
    GroupDescriptor desc;
    std::vector<GroupElement> elements;

    int size() const { return static_cast<int>(elements.size()); }
};

/// Builds a Sigma, rejecting duplicates/empty input. Throws std::invalid_argument.
SubsetSigma make_sigma(const GroupDescriptor& d, std::vector<GroupElement> elements);
SubsetSigma translate(const SubsetSigma& sigma, const GroupElement& gamma);  // right translation

/// Difference set SigmaSigma^-1 with, for each gamma, the exact list of
/// realizing index pairs (i, j) with sigma[i] * sigma[j]^-1 = gamma.
struct DifferenceSet {
    std::vector<GroupElement> elements;                  // canonical order
    std::vector<std::vector<std::pair<int, int>>> pairs; // parallel to elements
    std::vector<int> inverse_index;                      // position of gamma^-1

    int size() const { return static_cast<int>(elements.size()); }
    int index_of(const GroupElement& g) const;           // -1 if absent
};

DifferenceSet difference_set(const SubsetSigma& sigma);

/// Symmetric, unital subset Delta; the domain of partially defined
/// positive semi-definite functions.
struct PositivityDomain {
    GroupDescriptor desc;
    std::vector<GroupElement> elements;  // canonical order, contains identity

    int size() const { return static_cast<int>(elements.size()); }
    bool contains(const GroupElement& g) const;
};

struct DomainValidation {
    bool ok = false;
    PositivityDomain domain;
    bool missing_identity = false;
    std::vector<GroupElement> asymmetric;  // gamma in input with gamma^-1 absent
    std::string message;
};

DomainValidation validate_positivity_domain(const GroupDescriptor& d,
                                            const std::vector<GroupElement>& elements);

/// All maximal Sigma with SigmaSigma^-1 inside Delta, one representative per
/// right-translation class, each containing the identity. Maximal-clique
/// enumeration (Bron-Kerbosch) on the graph over Delta with s ~ t iff
/// st^-1 in Delta, restricted to cliques through the identity.
std::vector<SubsetSigma> enumerate_maximal_sigmas(const PositivityDomain& delta);

}  // namespace gsos
