#pragma once

// JSON forms of the library's reports. Field names are stable; see README.
// Objects keep insertion order so identical inputs give byte-identical text.
// Non-finite doubles serialize as null.

#include <string>

#include <json.hpp>

#include "blockgivens/blockdiag.hpp"
#include "blockgivens/bounds.hpp"
#include "blockgivens/pipeline.hpp"
#include "blockgivens/randmat.hpp"

namespace blockgivens {

using Json = nlohmann::ordered_json;

Json to_json(const Vector& v);
Json to_json(const BoundReport& r);
Json to_json(const SweepRecord& r);
Json to_json(const PropertyCheck& c);
Json to_json(const Lemma11Report& r);
/// Summary without the trace; the trace goes out as JSON lines.
Json to_json(const BlockDiagResult& r);
Json to_json(const PartitionPlan& p, bool permutations = true);
Json to_json(const ApproxReport& r);
Json to_json(const ColumnProfile& p);
Json to_json(const S1Report& r);
Json to_json(const SandwichReport& r);

/// {m, sizes[], norms[]?, expected_sq_norms[]?, L?}. A k field, when given,
/// must match the number of sizes.
ColumnProfile profile_from_json(const Json& j);

/// Two-space indented text with a trailing newline.
std::string dump(const Json& j);

}  // namespace blockgivens
