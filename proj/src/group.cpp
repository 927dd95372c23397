#include "gsos/group.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gsos {

GroupDescriptor GroupDescriptor::free_abelian(int d) {
    if (d < 1) throw std::invalid_argument("free_abelian: rank must be >= 1");
    GroupDescriptor g;
    g.kind = GroupKind::Abelian;
    g.moduli.assign(static_cast<std::size_t>(d), 0);
    return g;
}

GroupDescriptor GroupDescriptor::cyclic_product(std::vector<std::int64_t> m) {
    if (m.empty()) throw std::invalid_argument("cyclic_product: needs at least one modulus");
    for (auto mi : m)
        if (mi < 1) throw std::invalid_argument("cyclic_product: moduli must be >= 1");
    GroupDescriptor g;
    g.kind = GroupKind::Abelian;
    g.moduli = std::move(m);
    return g;
}

GroupDescriptor GroupDescriptor::abelian(std::vector<std::int64_t> m) {
    if (m.empty()) throw std::invalid_argument("abelian: needs at least one coordinate");
    for (auto mi : m)
        if (mi < 0) throw std::invalid_argument("abelian: moduli must be >= 0");
    GroupDescriptor g;
    g.kind = GroupKind::Abelian;
    g.moduli = std::move(m);
    return g;
}

GroupDescriptor GroupDescriptor::free_group(int rank) {
    if (rank < 1) throw std::invalid_argument("free_group: rank must be >= 1");
    GroupDescriptor g;
    g.kind = GroupKind::Free;
    g.free_rank = rank;
    return g;
}

bool GroupDescriptor::is_finite() const {
    if (kind == GroupKind::Free) return false;
    for (auto m : moduli)
        if (m == 0) return false;
    return true;
}

std::string GroupDescriptor::describe() const {
    std::ostringstream os;
    if (kind == GroupKind::Free) {
        os << "F_" << free_rank;
        return os.str();
    }
    for (std::size_t i = 0; i < moduli.size(); ++i) {
        if (i) os << " x ";
        if (moduli[i] == 0)
            os << "Z";
        else
            os << "C_" << moduli[i];
    }
    return os.str();
}

namespace {

std::int64_t reduce_mod(std::int64_t v, std::int64_t m) {
    if (m <= 0) return v;
    std::int64_t r = v % m;
    if (r < 0) r += m;
    return r;
}

void check_same_descriptor(const GroupElement& a, const GroupElement& b) {
    if (!(a.desc == b.desc))
        throw std::invalid_argument("group elements belong to different descriptors");
}

std::vector<std::int64_t> reduce_word(std::vector<std::int64_t> w) {
    std::vector<std::int64_t> out;
    out.reserve(w.size());
    for (auto letter : w) {
        if (!out.empty() && out.back() == -letter)
            out.pop_back();
        else
            out.push_back(letter);
    }
    return out;
}

}  // namespace

GroupElement identity(const GroupDescriptor& d) {
    GroupElement e;
    e.desc = d;
    if (d.kind == GroupKind::Abelian) e.data.assign(d.moduli.size(), 0);
    return e;
}

GroupElement abelian_element(const GroupDescriptor& d, std::vector<std::int64_t> coords) {
    if (d.kind != GroupKind::Abelian)
        throw std::invalid_argument("abelian_element: descriptor is not abelian");
    if (coords.size() != d.moduli.size())
        throw std::invalid_argument("abelian_element: coordinate count mismatch");
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = reduce_mod(coords[i], d.moduli[i]);
    return GroupElement{d, std::move(coords)};
}

bool is_canonical_word(const std::vector<std::int64_t>& letters, int rank) {
    for (std::size_t i = 0; i < letters.size(); ++i) {
        auto l = letters[i];
        if (l == 0 || std::abs(l) > rank) return false;
        if (i + 1 < letters.size() && letters[i + 1] == -l) return false;
    }
    return true;
}

GroupElement free_word(const GroupDescriptor& d, std::vector<std::int64_t> letters) {
    if (d.kind != GroupKind::Free)
        throw std::invalid_argument("free_word: descriptor is not a free group");
    for (auto l : letters)
        if (l == 0 || std::abs(l) > d.free_rank)
            throw std::invalid_argument("free_word: generator index out of range");
    return GroupElement{d, reduce_word(std::move(letters))};
}

GroupElement multiply(const GroupElement& a, const GroupElement& b) {
    check_same_descriptor(a, b);
    GroupElement r;
    r.desc = a.desc;
    if (a.desc.kind == GroupKind::Abelian) {
        r.data.resize(a.data.size());
        for (std::size_t i = 0; i < a.data.size(); ++i)
            r.data[i] = reduce_mod(a.data[i] + b.data[i], a.desc.moduli[i]);
    } else {
        r.data = a.data;
        r.data.insert(r.data.end(), b.data.begin(), b.data.end());
        r.data = reduce_word(std::move(r.data));
    }
    return r;
}

GroupElement inverse(const GroupElement& a) {
    GroupElement r;
    r.desc = a.desc;
    if (a.desc.kind == GroupKind::Abelian) {
        r.data.resize(a.data.size());
        for (std::size_t i = 0; i < a.data.size(); ++i)
            r.data[i] = reduce_mod(-a.data[i], a.desc.moduli[i]);
    } else {
        r.data.assign(a.data.rbegin(), a.data.rend());
        for (auto& l : r.data) l = -l;
    }
    return r;
}

bool is_identity(const GroupElement& a) {
    if (a.desc.kind == GroupKind::Free) return a.data.empty();
    for (auto c : a.data)
        if (c != 0) return false;
    return true;
}

bool element_less(const GroupElement& a, const GroupElement& b) {
    if (a.desc.kind == GroupKind::Free && a.data.size() != b.data.size())
        return a.data.size() < b.data.size();
    return a.data < b.data;
}

std::string to_string(const GroupElement& a) {
    std::ostringstream os;
    if (a.desc.kind == GroupKind::Abelian) {
        os << "(";
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            if (i) os << ",";
            os << a.data[i];
        }
        os << ")";
    } else {
        if (a.data.empty()) return "e";
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            if (i) os << ".";
            auto l = a.data[i];
            os << static_cast<char>('a' + std::abs(l) - 1);
            if (l < 0) os << "'";
        }
    }
    return os.str();
}

std::size_t element_hash(const GroupElement& a) {
    std::size_t h = a.desc.kind == GroupKind::Free ? 0x9e3779b97f4a7c15ull : 0ull;
    for (auto v : a.data) h = h * 1099511628211ull + static_cast<std::size_t>(v + 0x7fff);
    return h;
}

SubsetSigma make_sigma(const GroupDescriptor& d, std::vector<GroupElement> elements) {
    if (elements.empty()) throw std::invalid_argument("make_sigma: Sigma must be nonempty");
    for (const auto& g : elements)
        if (!(g.desc == d)) throw std::invalid_argument("make_sigma: element descriptor mismatch");
    for (std::size_t i = 0; i < elements.size(); ++i)
        for (std::size_t j = i + 1; j < elements.size(); ++j)
            if (elements[i] == elements[j])
                throw std::invalid_argument("make_sigma: duplicate element " + to_string(elements[i]));
    return SubsetSigma{d, std::move(elements)};
}

SubsetSigma translate(const SubsetSigma& sigma, const GroupElement& gamma) {
    std::vector<GroupElement> out;
    out.reserve(sigma.elements.size());
    for (const auto& s : sigma.elements) out.push_back(multiply(s, gamma));
    return SubsetSigma{sigma.desc, std::move(out)};
}

int DifferenceSet::index_of(const GroupElement& g) const {
    auto it = std::lower_bound(elements.begin(), elements.end(), g, ElementLess{});
    if (it != elements.end() && *it == g) return static_cast<int>(it - elements.begin());
    return -1;
}

DifferenceSet difference_set(const SubsetSigma& sigma) {
    std::map<GroupElement, std::vector<std::pair<int, int>>, ElementLess> acc;
    const int n = sigma.size();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            GroupElement g = multiply(sigma.elements[i], inverse(sigma.elements[j]));
            acc[std::move(g)].emplace_back(i, j);
        }
    }
    DifferenceSet ds;
    ds.elements.reserve(acc.size());
    for (auto& [g, p] : acc) {
        ds.elements.push_back(g);
        ds.pairs.push_back(std::move(p));
    }
    ds.inverse_index.resize(ds.elements.size());
    for (std::size_t k = 0; k < ds.elements.size(); ++k) {
        int inv = ds.index_of(inverse(ds.elements[k]));
        if (inv < 0) throw std::logic_error("difference_set: not closed under inversion");
        ds.inverse_index[k] = inv;
    }
    return ds;
}

bool PositivityDomain::contains(const GroupElement& g) const {
    auto it = std::lower_bound(elements.begin(), elements.end(), g, ElementLess{});
    return it != elements.end() && *it == g;
}

DomainValidation validate_positivity_domain(const GroupDescriptor& d,
                                            const std::vector<GroupElement>& elements) {
    DomainValidation v;
    std::set<GroupElement, ElementLess> set;
    for (const auto& g : elements) {
        if (!(g.desc == d)) {
            v.message = "element descriptor mismatch";
            return v;
        }
        set.insert(g);
    }
    v.missing_identity = set.find(identity(d)) == set.end();
    for (const auto& g : set)
        if (set.find(inverse(g)) == set.end()) v.asymmetric.push_back(g);
    if (v.missing_identity || !v.asymmetric.empty()) {
        std::ostringstream os;
        if (v.missing_identity) os << "identity missing; ";
        if (!v.asymmetric.empty()) {
            os << "not symmetric, inverse missing for:";
            for (const auto& g : v.asymmetric) os << " " << to_string(g);
        }
        v.message = os.str();
        return v;
    }
    v.ok = true;
    v.domain.desc = d;
    v.domain.elements.assign(set.begin(), set.end());
    return v;
}

namespace {

// Bron-Kerbosch with pivoting over the adjacency matrix `adj`.
void bron_kerbosch(std::vector<int>& R, std::vector<int> P, std::vector<int> X,
                   const std::vector<std::vector<bool>>& adj,
                   std::vector<std::vector<int>>& out) {
    if (P.empty() && X.empty()) {
        out.push_back(R);
        return;
    }
    int pivot = -1, best = -1;
    for (int u : P) {
        int deg = 0;
        for (int w : P)
            if (adj[u][w]) ++deg;
        if (deg > best) best = deg, pivot = u;
    }
    for (int u : X) {
        int deg = 0;
        for (int w : P)
            if (adj[u][w]) ++deg;
        if (deg > best) best = deg, pivot = u;
    }
    std::vector<int> candidates;
    for (int v : P)
        if (pivot < 0 || !adj[pivot][v]) candidates.push_back(v);
    for (int v : candidates) {
        R.push_back(v);
        std::vector<int> P2, X2;
        for (int w : P)
            if (adj[v][w]) P2.push_back(w);
        for (int w : X)
            if (adj[v][w]) X2.push_back(w);
        bron_kerbosch(R, std::move(P2), std::move(X2), adj, out);
        R.pop_back();
        P.erase(std::find(P.begin(), P.end(), v));
        X.push_back(v);
    }
}

}  // namespace

std::vector<SubsetSigma> enumerate_maximal_sigmas(const PositivityDomain& delta) {
    const auto& els = delta.elements;
    const int n = static_cast<int>(els.size());
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            GroupElement d1 = multiply(els[i], inverse(els[j]));
            if (delta.contains(d1) && delta.contains(inverse(d1))) adj[i][j] = adj[j][i] = true;
        }
    }

    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    std::vector<std::vector<int>> cliques;
    std::vector<int> R;
    bron_kerbosch(R, all, {}, adj, cliques);

    const GroupElement e = identity(delta.desc);
    int e_idx = -1;
    for (int i = 0; i < n; ++i)
        if (els[i] == e) e_idx = i;
    if (e_idx < 0) throw std::invalid_argument("enumerate_maximal_sigmas: domain has no identity");

    // Keep cliques through the identity, deduplicated up to right translation.
    // The class representative is the lexicographically largest sorted
    // translate C * c^-1 over c in C; it always contains the identity.
    std::set<std::vector<GroupElement>, std::function<bool(const std::vector<GroupElement>&,
                                                           const std::vector<GroupElement>&)>>
        seen([](const std::vector<GroupElement>& a, const std::vector<GroupElement>& b) {
            return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), ElementLess{});
        });
    std::vector<SubsetSigma> result;
    for (const auto& clique : cliques) {
        if (std::find(clique.begin(), clique.end(), e_idx) == clique.end()) continue;
        std::vector<GroupElement> members;
        members.reserve(clique.size());
        for (int idx : clique) members.push_back(els[idx]);

        std::vector<GroupElement> canon;
        for (const auto& c : members) {
            std::vector<GroupElement> tr;
            tr.reserve(members.size());
            const GroupElement cinv = inverse(c);
            for (const auto& m : members) tr.push_back(multiply(m, cinv));
            std::sort(tr.begin(), tr.end(), ElementLess{});
            if (canon.empty() ||
                std::lexicographical_compare(canon.begin(), canon.end(), tr.begin(), tr.end(),
                                             ElementLess{}))
                canon = std::move(tr);
        }
        if (!seen.insert(canon).second) continue;

        // Full pairwise verification before emitting.
        for (const auto& s : canon)
            for (const auto& t : canon)
                if (!delta.contains(multiply(s, inverse(t))))
                    throw std::logic_error("enumerate_maximal_sigmas: clique fails pairwise check");
        result.push_back(SubsetSigma{delta.desc, std::move(canon)});
    }
    std::sort(result.begin(), result.end(), [](const SubsetSigma& a, const SubsetSigma& b) {
        return std::lexicographical_compare(a.elements.begin(), a.elements.end(),
                                            b.elements.begin(), b.elements.end(), ElementLess{});
    });
    return result;
}

}  // namespace gsos
