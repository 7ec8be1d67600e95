#pragma once
// Command-line front end.  run() is the whole program: it parses one verb
// plus its flags, loads the referenced document items, dispatches the
// operation, and writes a deterministic report (no timestamps, sorted
// listings, byte-identical across runs for identical inputs).
//
// Verbs: cohomology, qis, det, torsion, euler-iso, chi, chi-rel, rel-class,
// quotient, harvest, collapse, enumerate, check-exact.
//
// Exit status: 0 on success, 1 on domain errors (bad mathematics: non-unit,
// non-acyclic input, unsupported ring, failed verification), 2 on parse and
// usage errors (unknown verb, malformed file or literal) with diagnostics
// naming file and line.

#include <iosfwd>
#include <string>
#include <vector>

namespace kdet {

// `args` excludes the program name.  Reports go to `out`, diagnostics and
// usage text to `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace kdet
