#pragma once

#include <json.hpp>

#include "repchain/chain/types.hpp"

namespace repchain::chain {

// Debug rendering for inspection only. Hashes, keys and signatures appear as
// lowercase hex; scores as six-decimal strings.
nlohmann::json to_json(const Utxo& v);
nlohmann::json to_json(const Transaction& v);
nlohmann::json to_json(const TxList& v);
nlohmann::json to_json(const TxDec& v);
nlohmann::json to_json(const TxDecSet& v);
nlohmann::json to_json(const TransactionBlock& v);
nlohmann::json to_json(const ReputationBlock& v);
nlohmann::json to_json(const StateBlock& v);
nlohmann::json to_json(const CollectiveSignature& v);

}  // namespace repchain::chain
