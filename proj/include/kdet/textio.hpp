#pragma once
// Line-oriented text format shared by all command-line verbs: one ring header
// per file followed by named items -- complexes, chain maps, short exact
// sequences, ladder scenarios, and standalone matrices -- in a single flat
// namespace.  Items are addressed from outside as FILE#NAME.
//
// Grammar ('#' starts a comment, indentation is free, names match
// [A-Za-z_][A-Za-z0-9_]*, declarations may only reference earlier names):
//
//   ring F3[e]
//   complex C
//     degree -1 rank 1
//     degree 0 rank 1
//     d -1 [[0+1*e]]
//   map f from C to D
//     at 0 [[1+1*e]]
//   matrix t [[2/3]]
//   ses S
//     inc f
//     proj g
//   scenario L
//     delta1 S
//     delta2 S
//     a f1
//     b f2
//     c f3
//     hsub 0 [[1]]
//     hquot 0 [[1]]
//     hconn 1 [[1]]
//
// Absent degrees have rank 0.  `d i` is the differential from degree i to
// i+1; `at i` is the map component on degree i.  The optional h-lines store
// homotopy witnesses for the three ladder squares (inclusion, projection,
// connecting); a witness component at degree i maps degree i of its source
// to degree i-1 of its target, and omitted components are zero.  When a
// scenario carries no witness line at all, witnesses are solved for; when it
// carries any, the stored witnesses are verified as given.
//
// Matrix literals are [[a,b],[c,d]] rows of ring elements, or []RxC for a
// matrix with a zero dimension.  Element literals: integers, a/b fractions,
// a+b*e dual numbers.  Ring tags: Z, Q, Z[1/m], F<p>, Z/<p>^<k>, F<p>[e].

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kdet/detfunctor.hpp"
#include "kdet/ktheory.hpp"

namespace kdet {

enum class ItemKind { Complex, Map, Ses, Scenario, Matrix };

// The lowercase keyword that introduces an item of this kind in a file.
std::string item_kind_name(ItemKind kind);

// A parsed file: one ring, one namespace.  `items` records (kind, name) in
// declaration order; `file` is kept for diagnostics.
struct Document {
    std::string file = "<input>";
    RingId ring = RingId::Z();
    std::vector<std::pair<ItemKind, std::string>> items;
    std::map<std::string, Complex> complexes;
    std::map<std::string, ChainMap> maps;
    std::map<std::string, Ses> seqs;
    std::map<std::string, TriangleIsoScenario> scenarios;
    std::map<std::string, Matrix> matrices;

    Document() : ring(RingId::Z()) {}

    bool has(const std::string& name) const;
    ItemKind kind_of(const std::string& name) const;  // throws ParseError
    // Names of all items of one kind, in declaration order.
    std::vector<std::string> names_of(ItemKind kind) const;
};

// Parse a document from text; `filename` appears in error messages only.
// Every defect -- malformed lines, bad literals, unknown references, and
// failed validation of a declared item (d*d != 0, non-commuting squares,
// broken witnesses, ...) -- is reported as ParseError with file:line context.
Document parse_document(const std::string& text,
                        const std::string& filename = "<input>");

// Read a file from disk and parse it.
Document load_document(const std::string& path);

// Typed lookups; throw ParseError naming the document's file when the name
// is unknown or declared as a different kind.
const Complex& need_complex(const Document& doc, const std::string& name);
const ChainMap& need_map(const Document& doc, const std::string& name);
const Ses& need_ses(const Document& doc, const std::string& name);
const TriangleIsoScenario& need_scenario(const Document& doc,
                                         const std::string& name);
const Matrix& need_matrix(const Document& doc, const std::string& name);

// A FILE#NAME reference; `name` is empty when the '#' part is absent (verbs
// that accept a bare FILE resolve it to the unique item of the needed kind).
struct ItemRef {
    std::string file;
    std::string name;
};
ItemRef split_ref(const std::string& ref);

// Deterministic emission.  Parsing an emitted block inside a document with
// the same ring reproduces an equal value.
std::string format_complex_block(const std::string& name, const Complex& c);
std::string format_map_block(const std::string& name, const std::string& dom,
                             const std::string& cod, const ChainMap& f);
std::string format_matrix_block(const std::string& name, const Matrix& m);

}  // namespace kdet
