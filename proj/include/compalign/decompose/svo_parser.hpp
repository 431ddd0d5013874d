#pragma once

#include <string_view>

#include "compalign/decompose/decomposition.hpp"

namespace compalign {

/// Rule-based parser for triplet captions:
///   "A/An/The <subject> [is|are] <verb-ing> a/an/the <object>"
/// or a bare three-word "subject verb object". Matching is
/// case-insensitive; extracted words keep their original spelling and the
/// -ing form is kept verbatim as the predicate. A multi-word subject or
/// object splits into attribute words plus a final head noun.
///
/// Throws UnparseableCaption when neither form matches.
CaptionDecomposition parse_svo(std::string_view caption);

}  // namespace compalign
