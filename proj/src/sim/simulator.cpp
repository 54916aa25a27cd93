#include "repchain/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "checkers.hpp"
#include "repchain/assignment/assignment.hpp"
#include "repchain/chain/encoding.hpp"
#include "repchain/chain/validation.hpp"
#include "repchain/consensus/engine.hpp"
#include "repchain/cross/cross_shard.hpp"
#include "repchain/crypto/hash.hpp"
#include "repchain/crypto/rng.hpp"
#include "repchain/epoch/epoch_sync.hpp"
#include "repchain/reputation/ledger.hpp"

namespace repchain::sim {
namespace {

using chain::Address;
using chain::Decision;
using chain::Iteration;
using chain::Transaction;
using chain::TxId;
using chain::Utxo;
using nlohmann::json;

constexpr std::uint64_t kMaxFee = 64;
constexpr std::size_t kMaxBatch = 8;  // payments per transaction

struct HashKey {
  std::size_t operator()(const Hash& h) const { return static_cast<std::size_t>(low64(h)); }
};

std::string short_hex(const Hash& h) { return to_hex(h).substr(0, 16); }

enum Phase : int { kDeliver = 0, kTimer = 1, kWorkload = 2 };

struct Event {
  Tick tick;
  int phase;
  std::uint64_t seq;
  std::function<void()> fn;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.tick, a.phase, a.seq) > std::tie(b.tick, b.phase, b.seq);
  }
};

/// Pending entries of one shard, oldest first by the submit tick of the
/// payment they carry.
class Mempool {
 public:
  void add(const TxId& id, Tick priority) {
    if (index_.count(id)) return;
    const Key key{priority, seq_++};
    queue_.emplace(key, id);
    index_.emplace(id, key);
  }
  void remove(const TxId& id) {
    auto it = index_.find(id);
    if (it == index_.end()) return;
    queue_.erase(it->second);
    index_.erase(it);
    in_flight_.erase(id);
  }
  bool contains(const TxId& id) const { return index_.count(id) != 0; }
  void set_in_flight(const TxId& id, bool on) {
    if (!contains(id)) return;
    if (on) {
      in_flight_.insert(id);
    } else {
      in_flight_.erase(id);
    }
  }
  bool in_flight(const TxId& id) const { return in_flight_.count(id) != 0; }
  std::vector<TxId> take(std::size_t n) const {
    std::vector<TxId> out;
    for (const auto& [key, id] : queue_) {
      if (out.size() >= n) break;
      if (!in_flight_.count(id)) out.push_back(id);
    }
    return out;
  }
  std::vector<TxId> ids() const {
    std::vector<TxId> out;
    for (const auto& [key, id] : queue_) out.push_back(id);
    return out;
  }
  bool empty() const { return queue_.empty(); }

 private:
  using Key = std::pair<Tick, std::uint64_t>;
  std::map<Key, TxId> queue_;
  std::unordered_map<TxId, Key, HashKey> index_;
  std::unordered_set<TxId, HashKey> in_flight_;
  std::uint64_t seq_ = 0;
};

struct Validator {
  ValidatorId id;
  crypto::KeyPair key;
  double capability = 1.0;
  bool malicious = false;
  std::uint32_t region = 0;
  Tick budget_tick = UINT64_MAX;
  std::uint64_t budget_left = 0;
  std::map<Address, Utxo> coins;       // spendable, not tied up in a pending tx
  std::deque<std::uint64_t> waiting;   // intents waiting for (re)issue
  std::uint64_t times_leader = 0;
  std::vector<Score> earned;
  std::vector<Score> cumulative;
};

/// A payment a validator wants made. Failed versions are re-issued until one
/// commits.
struct Intent {
  ValidatorId payer;
  ValidatorId payee;
  std::uint64_t amount = 0;
  bool want_cross = false;
  Tick submitted = 0;
  Epoch epoch = 0;
  std::optional<TxId> live;
  std::uint32_t versions = 0;
  bool done = false;
};

struct TxRecord {
  Transaction tx;
  cross::Route route;
  std::vector<std::uint64_t> intents;  // payments this version makes, oldest first
  bool injected = false;
  bool well_formed = false;
  std::size_t pending_releases = 0;
};

struct Iter {
  Iteration no = 0;
  chain::TxList list;
  std::vector<const Transaction*> txs;
  ValidatorId leader;
  Tick sent = 0;
  bool collecting = true;
  std::map<ValidatorId, chain::TxDec> received;
  std::map<ValidatorId, chain::TxDec> own;
  std::map<ValidatorId, std::pair<chain::TxDec, bool>> dec_checked;
  std::optional<bool> leader_sigs_ok;  // every member checks the same block
  std::optional<consensus::BlockPair> block;
  Hash block_hash{};
  Tick tb_sent = 0;
  std::map<ValidatorId, std::vector<chain::Warning>> warnings;
};

struct ConfirmedTb {
  Hash hash{};
  chain::TxDecSet decset;
  std::vector<std::uint64_t> values;
  std::vector<TxId> committed;
  std::set<ValidatorId> zeroed;  // leaders rolled after this TB was confirmed
};

struct Reservation {
  TxId tx{};
  Iteration iteration = 0;
};

struct ShardRt {
  consensus::Roster roster;
  std::size_t malicious = 0;
  ValidatorId leader;
  std::set<ValidatorId> kicked;
  std::optional<crypto::SeededRng> roll_rng;
  Iteration next_iter = 1;
  std::map<Iteration, Iter> live;
  Hash tip{};
  Hash confirmed_tip{};
  std::map<ValidatorId, Hash> member_tip;
  std::map<ValidatorId, std::map<Address, Reservation>> reservations;
  std::deque<ConfirmedTb> unreported;
  bool rb_running = false;
  std::uint64_t rb_gen = 0;
  Hash rb_tip{};
  bool first_rb = true;
  std::vector<Hash> prev_sb_hashes;
  bool closing = false;
  Tick last_rb = 0;
};

enum class Role { honest, simple, camouflage };

/// What a member sees when validating: the shard ledger plus the inputs it
/// already voted Yes on in iterations that are not settled yet.
class MemberView final : public chain::UtxoView {
 public:
  MemberView(const cross::ShardLedger& ledger, const std::map<Address, Reservation>& reserved, const TxId& self)
      : ledger_(ledger), reserved_(reserved), self_(self) {}
  bool owns(const chain::TxInput& in) const override { return ledger_.owns(in); }
  std::optional<Utxo> find(const Address& a) const override {
    auto u = ledger_.find(a);
    if (!u || u->spent_state != chain::SpentState::unspent) return u;
    auto r = reserved_.find(a);
    if (r != reserved_.end() && r->second.tx != self_) u->spent_state = chain::SpentState::locked;
    return u;
  }

 private:
  const cross::ShardLedger& ledger_;
  const std::map<Address, Reservation>& reserved_;
  TxId self_;
};

class Simulator {
 public:
  Simulator(const ScenarioConfig& cfg, const RunOptions& opts)
      : cfg_(cfg),
        opts_(opts),
        scheme_(crypto::make_scheme(cfg.scheme)),
        k_(cfg.k),
        m_(cfg.m()),
        dmax_(cfg.delta + (cfg.regions > 1 ? 1 : 0)),
        master_(master_seed(cfg.seed)),
        behavior_rng_(crypto::derive_subseed(master_, "behavior")),
        workload_rng_(crypto::derive_subseed(master_, "workload")),
        safety_(*scheme_, cfg.k) {}

  RunResult run() {
    setup();
    while (!queue_.empty() && !stopped_ && !finished_) {
      Event ev = queue_.top();
      queue_.pop();
      now_ = ev.tick;
      ev.fn();
    }
    finalize();
    return RunResult{std::move(report_), std::move(trace_)};
  }

 private:
  static crypto::Seed master_seed(std::uint64_t seed) {
    crypto::Sha256 h;
    h.update(as_bytes("repchain-sim"));
    h.update_u64(seed);
    return h.finish();
  }

  // ---- plumbing --------------------------------------------------------

  void at(Tick t, int phase, std::function<void()> fn) { queue_.push(Event{t, phase, seq_++, std::move(fn)}); }

  Tick delay(ValidatorId a, ValidatorId b) const {
    if (a == b) return 0;
    return cfg_.delta + (validators_[a.value].region != validators_[b.value].region ? 1 : 0);
  }

  void count_bytes(const std::string& kind, std::size_t bytes, std::uint64_t copies) {
    auto& c = report_.bytes[kind];
    c.messages += copies;
    c.bytes += bytes * copies;
  }

  void trace(json j) {
    if (!cfg_.trace) return;
    j["tick"] = now_;
    trace_ += j.dump();
    trace_ += '\n';
  }

  void fail(const std::string& invariant, const std::string& detail) {
    report_.violations.push_back(Violation{invariant, detail, now_});
    trace({{"event", "violation"}, {"invariant", invariant}, {"detail", detail}});
    stopped_ = true;
  }

  TxRecord& rec(const TxId& id) { return store_.at(id); }
  const TxRecord* find_rec(const TxId& id) const {
    auto it = store_.find(id);
    return it == store_.end() ? nullptr : &it->second;
  }

  Iter* find_iter(ShardId s, Iteration it, Epoch e) {
    if (e != epoch_) return nullptr;
    auto& live = shards_[s].live;
    auto f = live.find(it);
    return f == live.end() ? nullptr : &f->second;
  }

  consensus::Signer signer(ValidatorId v) const { return {v, &validators_[v.value].key}; }

  Role role_of(ValidatorId v, ShardId s) const {
    if (!validators_[v.value].malicious) return Role::honest;
    switch (cfg_.adversary) {
      case Adversary::none: return Role::honest;
      case Adversary::simple: return Role::simple;
      case Adversary::camouflage: return Role::camouflage;
      case Adversary::observe_act: return 2 * shards_[s].malicious > m_ ? Role::camouflage : Role::honest;
    }
    return Role::honest;
  }

  std::vector<consensus::Signer> cosigners(ShardId s) const {
    std::vector<consensus::Signer> out;
    for (auto v : shards_[s].roster.members) {
      if (role_of(v, s) != Role::simple) out.push_back(signer(v));
    }
    return out;
  }

  std::uint64_t budget_for(Validator& v, Tick t) {
    if (v.budget_tick != t) {
      v.budget_tick = t;
      v.budget_left = static_cast<std::uint64_t>(std::ceil(v.capability * cfg_.txlist_capacity - 1e-9));
    }
    return v.budget_left;
  }

  Tick leader_cost(ValidatorId v) const {
    return static_cast<Tick>(std::ceil(cfg_.leader_cost / validators_[v.value].capability - 1e-9));
  }

  static std::uint64_t tx_value(const Transaction& tx) { return chain::output_total(tx).value_or(0); }

  // ---- setup -----------------------------------------------------------

  void setup() {
    cfg_.validate();
    report_ = MetricsReport{};
    crypto::SeededRng setup_rng(crypto::derive_subseed(master_, "setup"));

    validators_.resize(cfg_.n);
    for (std::uint32_t i = 0; i < cfg_.n; ++i) {
      auto& v = validators_[i];
      v.id = ValidatorId{i};
      v.region = i % cfg_.regions;
      v.key = scheme_->keypair_from_seed(crypto::derive_subseed(master_, "key/" + std::to_string(i)));
      v.capability = cfg_.capability_min + (cfg_.capability_max - cfg_.capability_min) * setup_rng.next_unit();
      owner_of_[v.key.public_key] = v.id;
    }
    // Malicious set: a uniform subset of the requested size.
    std::vector<std::uint32_t> ids(cfg_.n);
    for (std::uint32_t i = 0; i < cfg_.n; ++i) ids[i] = i;
    const std::uint32_t bad = cfg_.malicious_count();
    for (std::uint32_t i = 0; i < bad; ++i) {
      const auto j = i + setup_rng.next_int(cfg_.n - i);
      std::swap(ids[i], ids[j]);
      validators_[ids[i]].malicious = true;
    }

    for (std::uint32_t s = 0; s < k_; ++s) ledgers_.emplace_back(s, k_);
    mempools_.resize(k_);
    coord_.resize(k_);
    aborted_.resize(k_);

    for (auto& v : validators_) {
      for (std::uint32_t i = 0; i < cfg_.genesis_utxos; ++i) {
        crypto::Sha256 h;
        h.update(as_bytes("genesis"));
        h.update_u64(v.id.value);
        h.update_u64(i);
        Utxo u;
        u.origin_tx = h.finish();
        u.address = chain::output_address(u.origin_tx, 0);
        u.owner = v.key.public_key;
        u.value = cfg_.genesis_value;
        ledgers_[cross::home_shard_of(u, k_)].insert(u);
        safety_.genesis(u);
        v.coins[u.address] = u;
      }
    }

    reputation::ScoreMap zeros;
    for (const auto& v : validators_) zeros[v.id] = Score{};
    const auto seed = crypto::derive_subseed(master_, "genesis-epoch");
    begin_epoch(0, assignment::assign_epoch(seed, zeros, k_), seed, {});
    at(0, kWorkload, [this] { workload_tick(); });
  }

  // ---- epochs ----------------------------------------------------------

  void begin_epoch(Tick t, const assignment::AssignmentResult& a, const crypto::Seed& seed,
                   std::vector<Hash> prev_sb_hashes) {
    now_ = t;
    ++epoch_;
    book_ = reputation::EpochScoreBook(epoch_);
    EpochMetrics em;
    em.epoch = epoch_;
    em.start = t;
    report_.epochs.push_back(em);
    epoch_latency_sum_ = 0;
    epoch_latency_n_ = 0;

    std::vector<ValidatorId> leaders = a.leaders;
    if (cfg_.leader_selection == LeaderSelection::random) {
      crypto::SeededRng rng(crypto::derive_subseed(seed, "random-leader"));
      for (std::size_t s = 0; s < k_; ++s) leaders[s] = a.shards[s][rng.next_int(a.shards[s].size())];
    }

    shards_.assign(k_, ShardRt{});
    for (std::uint32_t s = 0; s < k_; ++s) {
      auto& sh = shards_[s];
      sh.roster.shard = s;
      sh.roster.members = a.shards[s];
      for (auto v : sh.roster.members) {
        sh.roster.keys.push_back(validators_[v.value].key.public_key);
        if (validators_[v.value].malicious) ++sh.malicious;
        sh.member_tip[v] = Hash{};
      }
      sh.leader = leaders[s];
      sh.roll_rng.emplace(crypto::derive_subseed(seed, "roll/" + std::to_string(s)));
      sh.prev_sb_hashes = prev_sb_hashes;
      ++validators_[sh.leader.value].times_leader;
    }
    trace({{"event", "epoch_start"}, {"epoch", epoch_}});

    issuing_open_ = true;
    closing_ = false;
    const Epoch e = epoch_;
    at(t + cfg_.epoch_ticks, kTimer, [this, e] { end_issuing(e); });
    for (std::uint32_t s = 0; s < k_; ++s) start_iteration(s);
  }

  bool final_epoch() const { return epoch_ >= cfg_.epochs; }

  void end_issuing(Epoch e) {
    if (e != epoch_) return;
    if (final_epoch()) {
      submissions_open_ = false;
      draining_ = true;
      drain_deadline_ = now_ + cfg_.drain_ticks;
      return;
    }
    close_shards();
  }

  void close_shards() {
    issuing_open_ = false;
    closing_ = true;
    trace({{"event", "epoch_closing"}, {"epoch", epoch_}});
    for (std::uint32_t s = 0; s < k_; ++s) {
      shards_[s].closing = true;
      maybe_start_rb(s);
    }
    check_quiescence();
  }

  void check_quiescence() {
    if (!closing_ || barrier_scheduled_ || stopped_) return;
    for (std::uint32_t s = 0; s < k_; ++s) {
      const auto& sh = shards_[s];
      if (!sh.live.empty() || sh.rb_running || !sh.unreported.empty()) return;
    }
    if (cross_msgs_ > 0) return;
    barrier_scheduled_ = true;
    const Epoch e = epoch_;
    at(now_, kTimer, [this, e] {
      if (e == epoch_) barrier();
    });
  }

  void barrier() {
    barrier_scheduled_ = false;
    closing_ = false;
    auto& em = report_.epochs.back();

    // Anything still waiting for proofs cannot finish in this epoch.
    for (std::uint32_t s = 0; s < k_; ++s) {
      std::vector<TxId> pending;
      for (const auto& [id, cs] : coord_[s]) {
        if (cs.resolution == cross::Resolution::pending) pending.push_back(id);
      }
      for (const auto& id : pending) abort_cross(id, true);
      coord_[s].clear();
    }
    for (std::uint32_t s = 0; s < k_; ++s) {
      for (const auto& id : mempools_[s].ids()) {
        if (rec(id).route.output_shard != s) mempools_[s].remove(id);
      }
      aborted_[s].clear();
    }
    for (auto& v : atomicity_.audit()) {
      ++report_.atomicity_violations;
      fail("cross-shard atomicity", v);
    }
    if (stopped_) return;

    // Honest members agree on the TB chain.
    for (std::uint32_t s = 0; s < k_; ++s) {
      const auto& sh = shards_[s];
      for (auto v : sh.roster.members) {
        if (role_of(v, s) == Role::honest && sh.member_tip.at(v) != sh.confirmed_tip) {
          ++report_.agreement_violations;
          fail("agreement", "member " + std::to_string(v.value) + " of shard " + std::to_string(s) +
                                " ends the epoch on a different TB");
          return;
        }
      }
    }

    if (!ledgers_match("before consolidation")) return;
    for (auto& l : ledgers_) {
      for (const auto& [a, u] : l.utxos()) {
        if (u.spent_state == chain::SpentState::locked) {
          fail("cross-shard atomicity", "UTXO " + short_hex(a) + " still locked at epoch end");
          return;
        }
      }
      l.replace(epoch::consolidate_utxos(l.unspent()));
    }
    safety_.consolidate();
    if (!ledgers_match("after consolidation")) return;

    history_.close_epoch(book_);
    const auto cumulative = reputation::cumulative_scores(history_, cfg_.w, epoch_);
    for (auto& v : validators_) {
      v.earned.push_back(history_.epochs().at(epoch_).earned(v.id));
      auto c = cumulative.find(v.id);
      v.cumulative.push_back(c == cumulative.end() ? Score{} : c->second);
    }

    carry_over_mempools();
    rebuild_wallets();

    std::vector<chain::StateBlock> sbs;
    std::vector<consensus::Roster> rosters;
    for (std::uint32_t s = 0; s < k_; ++s) {
      const auto& sh = shards_[s];
      reputation::ScoreMap scores;
      for (auto v : sh.roster.members) {
        auto c = cumulative.find(v);
        scores[v] = c == cumulative.end() ? Score{} : c->second;
      }
      auto body = epoch::state_block_body(epoch_, s, std::move(scores), ledgers_[s].unspent());
      const auto participants = cosigners(s);
      auto sb = epoch::seal_state_block(std::move(body), sh.roster, participants, cfg_.pow_difficulty, *scheme_);
      count_bytes("state_block", chain::encoded_size(sb), cfg_.n);
      if (!opts_.state_block_dir.empty()) epoch::write_state_block(opts_.state_block_dir, sb);
      trace({{"event", "state_block"}, {"epoch", epoch_}, {"shard", s}, {"hash", short_hex(chain::block_hash(sb))}});
      sbs.push_back(std::move(sb));
      rosters.push_back(sh.roster);
    }
    epoch::SyncResult sync;
    try {
      sync = epoch::synchronize(sbs, rosters, k_, cfg_.pow_difficulty, *scheme_);
    } catch (const epoch::SyncFailure& e) {
      fail("synchronization", e.what());
      return;
    }

    // SB cosigning, the PoW nonce, then every validator fetching the blocks.
    const Tick next = now_ + 4 * dmax_ + 1 + dmax_;
    Tick last_rb = em.start;
    for (const auto& sh : shards_) last_rb = std::max(last_rb, sh.last_rb);
    em.last_rb = last_rb;
    em.next_start = next;
    em.transition_latency = next - last_rb;
    em.throughput = static_cast<double>(em.committed) / (static_cast<double>(next - em.start) * cfg_.seconds_per_tick);
    em.mean_latency = epoch_latency_n_ ? epoch_latency_sum_ / static_cast<double>(epoch_latency_n_) : 0.0;
    trace({{"event", "epoch_end"}, {"epoch", epoch_}, {"next_start", next}});

    if (final_epoch()) {
      report_.total_ticks = next;
      finished_ = true;
      return;
    }
    at(next, kTimer, [this, a = sync.assignment, seed = sync.seed, hashes = sync.state_block_hashes] {
      begin_epoch(now_, a, seed, hashes);
    });
  }

  bool ledgers_match(const char* when) {
    std::uint64_t total = 0;
    const auto truth = safety_.by_shard();
    for (std::uint32_t s = 0; s < k_; ++s) {
      const auto have = ledgers_[s].unspent();
      total += ledgers_[s].total_unspent_value();
      if (have != truth[s]) {
        fail("ledger consistency", "shard " + std::to_string(s) + " UTXO set diverges from the global replay " + when);
        return false;
      }
    }
    if (total + safety_.fees() != safety_.genesis_value()) {
      fail("value conservation", std::string("unspent value plus fees differs from genesis ") + when);
      return false;
    }
    return true;
  }

  /// Intra-shard entries survive the boundary only if consolidation left
  /// their inputs untouched; the rest go back to their payers.
  void carry_over_mempools() {
    for (std::uint32_t s = 0; s < k_; ++s) {
      for (const auto& id : mempools_[s].ids()) {
        const auto& tx = rec(id).tx;
        bool intact = true;
        for (const auto& in : tx.inputs) {
          auto u = ledgers_[cross::input_shard_of(in, k_)].find(in.utxo);
          if (!u || u->spent_state != chain::SpentState::unspent || u->value != in.value ||
              u->origin_tx != in.origin_tx) {
            intact = false;
            break;
          }
        }
        if (!intact) {
          mempools_[s].remove(id);
          version_failed(id, false);
        }
      }
    }
  }

  void rebuild_wallets() {
    std::set<Address> tied;
    for (std::uint32_t s = 0; s < k_; ++s) {
      for (const auto& id : mempools_[s].ids()) {
        for (const auto& in : rec(id).tx.inputs) tied.insert(in.utxo);
      }
    }
    for (auto& v : validators_) v.coins.clear();
    for (const auto& l : ledgers_) {
      for (const auto& u : l.unspent()) {
        if (tied.count(u.address)) continue;
        auto o = owner_of_.find(u.owner);
        if (o != owner_of_.end()) validators_[o->second.value].coins[u.address] = u;
      }
    }
  }

  // ---- consensus iterations -------------------------------------------

  Transaction make_injection(ValidatorId attacker) {
    auto& v = validators_[attacker.value];
    Utxo coin;
    if (!v.coins.empty()) {
      coin = v.coins.begin()->second;
    } else {
      coin.origin_tx = crypto::sha256(as_bytes("forged/" + std::to_string(attacker.value)));
      coin.address = chain::output_address(coin.origin_tx, 0);
      coin.owner = v.key.public_key;
      coin.value = cfg_.genesis_value;
    }
    Transaction tx;
    tx.inputs.push_back(chain::TxInput{coin.address, coin.origin_tx, coin.value, {}});
    tx.outputs.push_back(chain::TxOutput{v.key.public_key, 2 * coin.value + (++injections_)});
    tx.submit_time = now_;
    const crypto::KeyPair* signers[] = {&v.key};
    chain::sign_transaction(tx, signers, *scheme_);
    TxRecord r;
    r.route = cross::route_tx(tx, k_);
    r.injected = true;
    r.well_formed = chain::well_formed(tx);
    r.tx = tx;
    store_.emplace(tx.id, std::move(r));
    return tx;
  }

  void start_iteration(ShardId s) {
    auto& sh = shards_[s];
    if (sh.closing || stopped_) return;
    const Iteration it = sh.next_iter++;
    const ValidatorId leader = sh.leader;
    const Epoch e = epoch_;

    std::vector<TxId> cand;
    std::optional<TxId> injected;
    if (role_of(leader, s) != Role::honest) {
      injected = make_injection(leader).id;
      cand.push_back(*injected);
    }
    for (const auto& id : mempools_[s].take(cfg_.txlist_capacity)) {
      if (cand.size() >= cfg_.txlist_capacity) break;
      cand.push_back(id);
    }

    Iter rec_it;
    rec_it.no = it;
    rec_it.leader = leader;
    rec_it.sent = now_;
    rec_it.list = consensus::propose_txlist(e, it, s, cand, cfg_.txlist_capacity, signer(leader), *scheme_);
    for (const auto& h : rec_it.list.tx_hashes) {
      rec_it.txs.push_back(&rec(h).tx);
      mempools_[s].set_in_flight(h, true);
    }
    count_bytes("txlist", chain::encoded_size(rec_it.list), m_ - 1);
    trace({{"event", "txlist"},
           {"epoch", e},
           {"shard", s},
           {"iteration", it},
           {"leader", leader.value},
           {"size", rec_it.list.tx_hashes.size()}});
    sh.live.emplace(it, std::move(rec_it));

    member_vote(s, it, leader);
    for (auto v : sh.roster.members) {
      if (v == leader) continue;
      at(now_ + delay(leader, v), kDeliver, [this, s, it, v, e] {
        if (find_iter(s, it, e)) member_vote(s, it, v);
      });
    }
    at(now_ + 2 * dmax_, kTimer, [this, s, it, e] {
      if (find_iter(s, it, e)) close_collection(s, it);
    });
  }

  Decision honest_check(ShardId s, ValidatorId v, const Transaction& tx, chain::ValidationBudget& budget) {
    const auto& r = rec(tx.id);
    auto& reserved = shards_[s].reservations[v];
    MemberView view(ledgers_[s], reserved, tx.id);
    // Structure is checked once per transaction; every member gets the same answer.
    if (!r.well_formed) return budget.consume() ? Decision::no : Decision::unknown;
    constexpr auto kChecked = chain::StructureCheck::already_passed;
    if (r.route.output_shard == s) {
      const Decision d = chain::validate_tx_structure(tx, view, *scheme_, budget, kChecked);
      if (d != Decision::yes || !r.route.cross()) return d;
      auto cs = coord_[s].find(tx.id);
      if (cs == coord_[s].end() || cs->second.resolution != cross::Resolution::pending) return Decision::no;
      switch (cross::resolve(cs->second)) {
        case cross::Action::propose_commit: return Decision::yes;
        case cross::Action::abort: return Decision::no;
        case cross::Action::wait: return Decision::unknown;
      }
      return Decision::unknown;
    }
    const auto& ins = r.route.input_shards;
    if (!std::binary_search(ins.begin(), ins.end(), s) || aborted_[s].count(tx.id)) {
      return budget.consume() ? Decision::no : Decision::unknown;
    }
    return chain::validate_tx_structure(tx, view, *scheme_, budget, kChecked);
  }

  void member_vote(ShardId s, Iteration it, ValidatorId v) {
    auto& sh = shards_[s];
    Iter& ir = sh.live.at(it);
    const Role role = role_of(v, s);
    if (role == Role::honest && !consensus::verify_txlist(ir.list, *sh.roster.key_of(ir.leader), *scheme_)) return;

    auto& val = validators_[v.value];
    chain::ValidationBudget budget{budget_for(val, now_)};
    const std::size_t size = ir.list.tx_hashes.size();
    std::vector<std::size_t> order(size);
    for (std::size_t i = 0; i < size; ++i) order[i] = i;
    if (budget.remaining < size) {
      for (std::size_t i = size; i > 1; --i) std::swap(order[i - 1], order[behavior_rng_.next_int(i)]);
    }
    auto check = [&](const Transaction& tx, chain::ValidationBudget& b) { return honest_check(s, v, tx, b); };
    chain::TxDec dec = consensus::vote(ir.list, ir.txs, check, budget, order, k_, signer(v), *scheme_);
    val.budget_left = budget.remaining;

    if (role == Role::simple || role == Role::camouflage) {
      auto decisions = dec.decisions;
      const bool collude = role == Role::camouflage && role_of(ir.leader, s) == Role::camouflage;
      for (std::size_t i = 0; i < size; ++i) {
        if (role == Role::simple) {
          if (decisions[i] == Decision::yes) {
            decisions[i] = Decision::no;
          } else if (decisions[i] == Decision::no) {
            decisions[i] = Decision::yes;
          }
        } else if (collude && rec(ir.list.tx_hashes[i]).injected) {
          decisions[i] = Decision::yes;
        }
      }
      if (decisions != dec.decisions) dec = consensus::sign_decisions(ir.list, std::move(decisions), k_, signer(v), *scheme_);
    } else {
      auto& reserved = sh.reservations[v];
      for (std::size_t i = 0; i < size; ++i) {
        if (dec.decisions[i] != Decision::yes) continue;
        for (const auto& in : ir.txs[i]->inputs) {
          if (ledgers_[s].owns(in)) reserved.emplace(in.utxo, Reservation{ir.txs[i]->id, it});
        }
      }
    }
    ir.own[v] = dec;
    count_bytes("txdec", chain::encoded_size(dec), v == ir.leader ? 0 : 1);
    const Epoch e = epoch_;
    if (v == ir.leader) {
      receive_txdec(s, it, std::move(dec));
    } else {
      at(now_ + delay(v, ir.leader), kDeliver, [this, s, it, e, dec = std::move(dec)]() mutable {
        if (find_iter(s, it, e)) receive_txdec(s, it, std::move(dec));
      });
    }
  }

  void receive_txdec(ShardId s, Iteration it, chain::TxDec dec) {
    Iter& ir = shards_[s].live.at(it);
    if (!ir.collecting) return;
    ir.received[dec.voter] = std::move(dec);
    if (ir.received.size() == m_) close_collection(s, it);
  }

  void close_collection(ShardId s, Iteration it) {
    Iter& ir = shards_[s].live.at(it);
    if (!ir.collecting) return;
    ir.collecting = false;
    trace({{"event", "collect_close"}, {"epoch", epoch_}, {"shard", s}, {"iteration", it},
           {"txdecs", ir.received.size()}});
    const Epoch e = epoch_;
    at(now_ + leader_cost(ir.leader), kTimer, [this, s, it, e] {
      if (find_iter(s, it, e)) send_block(s, it);
    });
  }

  consensus::CommitsHere commits_here(ShardId s) {
    return [this, s](const TxId& id) { return rec(id).route.output_shard == s; };
  }

  void send_block(ShardId s, Iteration it) {
    auto& sh = shards_[s];
    Iter& ir = sh.live.at(it);
    std::vector<chain::TxDec> decs;
    for (auto& [v, d] : ir.received) decs.push_back(d);
    const Role role = role_of(ir.leader, s);
    auto bp = consensus::build_block(ir.list, ir.txs, std::move(decs), m_, sh.tip, commits_here(s), signer(ir.leader),
                                     *scheme_);
    if (role != Role::honest) {
      // Simple leaders ignore the votes altogether; camouflage leaders slip
      // their own transaction into an otherwise honest block.
      std::set<TxId> keep;
      for (const auto& tx : bp.tb.txs) keep.insert(tx.id);
      bp.tb.txs.clear();
      for (std::size_t i = 0; i < ir.txs.size(); ++i) {
        const auto& r = rec(ir.list.tx_hashes[i]);
        const bool take = r.injected || (role == Role::simple ? r.route.output_shard == s : keep.count(r.tx.id) != 0);
        if (take) bp.tb.txs.push_back(r.tx);
      }
      bp.tb.leader_sig = scheme_->sign(validators_[ir.leader.value].key, chain::signing_bytes(bp.tb));
    }
    ir.block_hash = chain::block_hash(bp.tb);
    sh.tip = ir.block_hash;
    sh.member_tip[ir.leader] = ir.block_hash;
    ir.tb_sent = now_;
    count_bytes("tb", chain::encoded_size(bp.tb), m_ - 1);
    count_bytes("txdecset", chain::encoded_size(bp.decset), m_ - 1);
    trace({{"event", "tb"}, {"epoch", epoch_}, {"shard", s}, {"iteration", it}, {"txs", bp.tb.txs.size()},
           {"hash", short_hex(ir.block_hash)}});
    ir.block = std::move(bp);

    const Epoch e = epoch_;
    for (auto v : sh.roster.members) {
      if (v == ir.leader) continue;
      at(now_ + delay(ir.leader, v), kDeliver, [this, s, it, v, e] {
        if (find_iter(s, it, e)) member_check_block(s, it, v);
      });
    }
    at(now_ + 2 * dmax_, kTimer, [this, s, it, e] {
      if (find_iter(s, it, e)) tally(s, it);
    });
    start_iteration(s);
  }

  void member_check_block(ShardId s, Iteration it, ValidatorId v) {
    auto& sh = shards_[s];
    Iter& ir = sh.live.at(it);
    const Role role = role_of(v, s);
    consensus::WarningReason reason = consensus::WarningReason::unsupported_tx;
    if (role != Role::simple) {
      consensus::VerifyContext ctx;
      ctx.list = &ir.list;
      ctx.txs = ir.txs;
      auto own = ir.own.find(v);
      ctx.own_dec = own == ir.own.end() ? nullptr : &own->second;
      ctx.self = v;
      ctx.roster = &sh.roster;
      ctx.leader_key = sh.roster.key_of(ir.leader);
      ctx.expected_prev = sh.member_tip.at(v);
      ctx.k = k_;
      ctx.commits_here = commits_here(s);
      ctx.verify_dec = [this, &ir](const chain::TxDec& d, const crypto::PublicKey& key) {
        auto c = ir.dec_checked.find(d.voter);
        if (c != ir.dec_checked.end() && c->second.first == d) return c->second.second;
        const bool ok = consensus::verify_txdec(d, ir.list, key, k_, *scheme_);
        ir.dec_checked[d.voter] = {d, ok};
        return ok;
      };
      ctx.verify_leader = [this, &ir, key = ctx.leader_key](const chain::TransactionBlock& tb,
                                                             const chain::TxDecSet& ds) {
        if (!ir.leader_sigs_ok) {
          ir.leader_sigs_ok = scheme_->verify(*key, chain::signing_bytes(tb), tb.leader_sig) &&
                              scheme_->verify(*key, chain::signing_bytes(ds), ds.leader_sig);
        }
        return *ir.leader_sigs_ok;
      };
      reason = consensus::verify_block(ctx, ir.block->tb, ir.block->decset, *scheme_);
      if (role == Role::camouflage && role_of(ir.leader, s) == Role::camouflage) reason = consensus::WarningReason::none;
      if (reason == consensus::WarningReason::none) sh.member_tip[v] = ir.block_hash;
    }
    if (reason == consensus::WarningReason::none) return;

    auto w = consensus::make_warning(epoch_, it, s, reason, signer(v), *scheme_);
    count_bytes("warning", chain::encoded_size(w), m_ - 1);
    trace({{"event", "warning"}, {"epoch", epoch_}, {"shard", s}, {"iteration", it}, {"sender", v.value},
           {"reason", std::string(consensus::to_string(reason))}});
    const Epoch e = epoch_;
    for (auto u : sh.roster.members) {
      at(now_ + delay(v, u), kDeliver, [this, s, it, u, e, w] {
        if (auto* x = find_iter(s, it, e)) x->warnings[u].push_back(w);
      });
    }
  }

  void tally(ShardId s, Iteration it) {
    auto& sh = shards_[s];
    Iter& ir = sh.live.at(it);
    std::optional<consensus::TallyResult> verdict;
    // Members holding identical warning sets reach identical verdicts.
    std::vector<std::pair<const std::vector<chain::Warning>*, consensus::TallyResult>> seen;
    static const std::vector<chain::Warning> kNone;
    for (auto v : sh.roster.members) {
      if (role_of(v, s) != Role::honest) continue;
      auto got = ir.warnings.find(v);
      const auto& ws = got == ir.warnings.end() ? kNone : got->second;
      auto cached = std::find_if(seen.begin(), seen.end(), [&ws](const auto& p) { return *p.first == ws; });
      if (cached == seen.end()) {
        seen.emplace_back(&ws, consensus::tally_warnings(ws, sh.roster, epoch_, it, *scheme_));
        cached = std::prev(seen.end());
      }
      const auto r = cached->second;
      if (verdict && *verdict != r) {
        ++report_.agreement_violations;
        fail("agreement", "honest members of shard " + std::to_string(s) + " disagree on rolling iteration " +
                              std::to_string(it));
        return;
      }
      verdict = r;
    }
    if (verdict.value_or(consensus::TallyResult::proceed) == consensus::TallyResult::roll) {
      roll(s, it);
    } else {
      confirm(s, it);
    }
  }

  void release_reservations(ShardId s, const std::function<bool(const Reservation&)>& pred) {
    for (auto& [v, res] : shards_[s].reservations) {
      for (auto i = res.begin(); i != res.end();) {
        i = pred(i->second) ? res.erase(i) : std::next(i);
      }
    }
  }

  void confirm(ShardId s, Iteration it) {
    auto& sh = shards_[s];
    Iter& ir = sh.live.at(it);
    const auto& tb = ir.block->tb;
    const auto& decset = ir.block->decset;

    ConfirmedTb done;
    done.hash = ir.block_hash;
    std::set<TxId> in_tb;
    for (const auto& tx : tb.txs) {
      in_tb.insert(tx.id);
      if (auto bad = safety_.commit(tx)) {
        ++report_.invalid_commits;
        fail("global safety", "shard " + std::to_string(s) + " iteration " + std::to_string(it) + ": " + *bad);
        return;
      }
      auto& r = rec(tx.id);
      for (const auto& in : tx.inputs) {
        if (ledgers_[s].owns(in)) atomicity_.spent(tx.id, in.utxo);
      }
      if (!ledgers_[s].spend(tx)) {
        fail("ledger consistency", "committed transaction " + short_hex(tx.id) + " cannot spend its local inputs");
        return;
      }
      ledgers_[s].add_outputs(tx);
      credit_outputs(tx);
      mempools_[s].remove(tx.id);
      done.committed.push_back(tx.id);
      if (r.route.cross()) commit_cross(tx.id);
    }

    const auto counts = consensus::tally(ir.list, decset.decs);
    std::set<ShardId> excerpt_dests;
    for (std::size_t i = 0; i < ir.list.tx_hashes.size(); ++i) {
      const TxId id = ir.list.tx_hashes[i];
      done.values.push_back(tx_value(*ir.txs[i]));
      if (in_tb.count(id)) continue;
      auto& r = rec(id);
      if (r.injected) continue;
      const auto outcome = reputation::outcome_of(counts[i].yes, counts[i].no, m_);
      if (r.route.output_shard == s) {
        if (outcome == reputation::Outcome::rejected) {
          mempools_[s].remove(id);
          if (r.route.cross()) {
            abort_cross(id, false);
          } else {
            version_failed(id, true);
          }
        } else {
          mempools_[s].set_in_flight(id, false);
        }
        continue;
      }
      // Lock entry.
      if (aborted_[s].count(id)) {
        mempools_[s].remove(id);
        continue;
      }
      if (outcome == reputation::Outcome::included) {
        if (ledgers_[s].lock_inputs(r.tx) != cross::LockVerdict::accept) {
          fail("cross-shard atomicity", "accepted transaction " + short_hex(id) + " could not lock its inputs");
          return;
        }
        for (const auto& in : r.tx.inputs) {
          if (ledgers_[s].owns(in)) atomicity_.locked(id, in.utxo);
        }
        trace({{"event", "lock"}, {"shard", s}, {"tx", short_hex(id)}});
        mempools_[s].remove(id);
        excerpt_dests.insert(r.route.output_shard);
      } else if (outcome == reputation::Outcome::rejected) {
        mempools_[s].remove(id);
        excerpt_dests.insert(r.route.output_shard);
      } else {
        mempools_[s].set_in_flight(id, false);
      }
    }
    for (auto dest : excerpt_dests) send_excerpt(cross::make_excerpt(ir.list, decset, dest, k_));

    release_reservations(s, [it](const Reservation& r) { return r.iteration == it; });
    for (auto v : sh.roster.members) {
      if (sh.member_tip[v] == tb.prev_tb_hash) sh.member_tip[v] = ir.block_hash;
    }
    sh.confirmed_tip = ir.block_hash;
    done.decset = decset;
    trace({{"event", "confirm"}, {"epoch", epoch_}, {"shard", s}, {"iteration", it}, {"hash", short_hex(done.hash)}});
    sh.unreported.push_back(std::move(done));
    sh.live.erase(it);
    maybe_start_rb(s);
    check_quiescence();
  }

  void credit_outputs(const Transaction& tx) {
    for (std::size_t i = 0; i < tx.outputs.size(); ++i) {
      auto o = owner_of_.find(tx.outputs[i].owner);
      if (o == owner_of_.end()) continue;
      Utxo u{chain::output_address(tx.id, static_cast<std::uint32_t>(i)), tx.outputs[i].owner, tx.outputs[i].value,
             tx.id, chain::SpentState::unspent};
      validators_[o->second.value].coins[u.address] = u;
    }
  }

  void roll(ShardId s, Iteration it) {
    auto& sh = shards_[s];
    const ValidatorId old = sh.live.at(it).leader;
    report_.rollings.push_back(
        RollingEvent{epoch_, s, old, it, now_, validators_[old.value].malicious});
    ++report_.epochs.back().rollings;
    book_.apply_rolling_penalty(old);
    for (auto& c : sh.unreported) c.zeroed.insert(old);
    sh.kicked.insert(old);

    for (auto i = sh.live.lower_bound(it); i != sh.live.end();) {
      for (const auto& h : i->second.list.tx_hashes) mempools_[s].set_in_flight(h, false);
      i = sh.live.erase(i);
    }
    release_reservations(s, [it](const Reservation& r) { return r.iteration >= it; });
    sh.tip = sh.confirmed_tip;
    for (auto& [v, t] : sh.member_tip) t = sh.confirmed_tip;
    if (sh.rb_running) {
      sh.rb_running = false;
      ++sh.rb_gen;
    }

    try {
      if (cfg_.leader_selection == LeaderSelection::random) {
        std::vector<ValidatorId> left;
        for (auto v : sh.roster.members) {
          if (!sh.kicked.count(v)) left.push_back(v);
        }
        if (left.empty()) throw assignment::ShardFailure("every member of the shard has been kicked");
        sh.leader = left[sh.roll_rng->next_int(left.size())];
      } else {
        const auto scores = reputation::cumulative_scores(history_, cfg_.w, epoch_, &book_);
        sh.leader = assignment::reselect_leader(sh.roster.members, sh.kicked, scores, *sh.roll_rng);
      }
    } catch (const assignment::ShardFailure& e) {
      fail("leader availability", "shard " + std::to_string(s) + ": " + e.what());
      return;
    }
    ++validators_[sh.leader.value].times_leader;
    trace({{"event", "roll"}, {"epoch", epoch_}, {"shard", s}, {"iteration", it}, {"old_leader", old.value},
           {"new_leader", sh.leader.value}});
    maybe_start_rb(s);
    if (sh.closing) {
      check_quiescence();
    } else {
      start_iteration(s);
    }
  }

  // ---- reputation blocks ------------------------------------------------

  void maybe_start_rb(ShardId s) {
    auto& sh = shards_[s];
    if (sh.rb_running || sh.unreported.empty() || stopped_) return;
    const bool last = sh.closing && sh.live.empty();
    if (sh.unreported.size() < cfg_.rho && !last) return;
    const std::size_t count = std::min<std::size_t>(cfg_.rho, sh.unreported.size());

    reputation::ScoreMap deltas;
    std::vector<Hash> hashes;
    for (auto v : sh.roster.members) deltas[v] = Score{};
    static const reputation::ScoringPolicy policy;
    for (std::size_t i = 0; i < count; ++i) {
      const auto& c = sh.unreported[i];
      hashes.push_back(c.hash);
      const consensus::ScoredIteration si{&c.decset, c.values};
      for (const auto& [v, d] : consensus::compute_score_deltas(sh.roster, std::span(&si, 1), policy)) {
        if (!c.zeroed.count(v)) deltas[v] += d;
      }
    }
    std::optional<std::vector<Hash>> sb_hashes;
    if (sh.first_rb && !sh.prev_sb_hashes.empty()) sb_hashes = sh.prev_sb_hashes;
    auto body = consensus::reputation_block_body(epoch_, s, sh.rb_tip, std::move(hashes), std::move(deltas),
                                                 std::move(sb_hashes));
    const auto participants = cosigners(s);
    auto rb = consensus::build_reputation_block(std::move(body), sh.roster, participants, *scheme_);
    count_bytes("rb", chain::encoded_size(rb), m_ - 1);
    count_bytes("cosign", 3 * 64, participants.size());

    sh.rb_running = true;
    const std::uint64_t gen = ++sh.rb_gen;
    const Epoch e = epoch_;
    at(now_ + 4 * dmax_, kTimer, [this, s, gen, e, count, rb = std::move(rb)] {
      if (e == epoch_) finish_rb(s, gen, rb, count);
    });
  }

  void finish_rb(ShardId s, std::uint64_t gen, const chain::ReputationBlock& rb, std::size_t count) {
    auto& sh = shards_[s];
    if (!sh.rb_running || gen != sh.rb_gen) return;
    sh.rb_running = false;
    if (!consensus::verify_reputation_block(rb, sh.roster, *scheme_)) {
      fail("reputation block", "shard " + std::to_string(s) + " produced an RB its roster cannot verify");
      return;
    }
    book_.add_block(rb.score_deltas);
    sh.rb_tip = chain::block_hash(rb);
    sh.first_rb = false;
    sh.last_rb = now_;
    for (std::size_t i = 0; i < count; ++i) {
      for (const auto& id : sh.unreported.front().committed) record_commit(id);
      sh.unreported.pop_front();
    }
    trace({{"event", "rb"}, {"epoch", epoch_}, {"shard", s}, {"tbs", count}, {"hash", short_hex(sh.rb_tip)}});
    maybe_start_rb(s);
    check_quiescence();
  }

  void record_commit(const TxId& id) {
    const auto& r = rec(id);
    auto& em = report_.epochs.back();
    ++report_.committed;
    ++em.committed;
    const double latency = static_cast<double>(now_ - r.tx.submit_time);
    latency_sum_ += latency;
    epoch_latency_sum_ += latency;
    ++epoch_latency_n_;
    if (r.route.cross()) {
      ++report_.cross_committed;
      ++em.cross_committed;
    }
    for (auto i : r.intents) {
      auto& in = intents_[i];
      in.done = true;
      ++report_.liveness.committed;
      if (epoch_ <= in.epoch + 1) ++report_.liveness.within_two_epochs;
      ++intents_done_;
    }
    trace({{"event", "commit"}, {"tx", short_hex(id)}, {"intents", r.intents}});
  }

  // ---- cross-shard ------------------------------------------------------

  void send_excerpt(chain::ProofExcerpt ex) {
    const ShardId dest = ex.destination;
    count_bytes("excerpt", chain::encoded_size(ex), m_);
    ++cross_msgs_;
    const Epoch e = epoch_;
    at(now_ + dmax_, kDeliver, [this, e, ex = std::move(ex)] {
      --cross_msgs_;
      if (e == epoch_) receive_excerpt(ex);
      check_quiescence();
    });
    (void)dest;
  }

  void receive_excerpt(const chain::ProofExcerpt& ex) {
    const ShardId o = ex.destination;
    auto verdicts = cross::verify_excerpt(ex, shards_[ex.source].roster, k_, *scheme_);
    if (!verdicts) {
      fail("cross-shard proof", "excerpt from shard " + std::to_string(ex.source) + " failed verification");
      return;
    }
    for (std::size_t i = 0; i < ex.tx_hashes.size(); ++i) {
      auto cs = coord_[o].find(ex.tx_hashes[i]);
      if (cs == coord_[o].end() || cs->second.resolution != cross::Resolution::pending) continue;
      cs->second.record(ex.source, (*verdicts)[i]);
      switch (cross::resolve(cs->second)) {
        case cross::Action::propose_commit:
          mempools_[o].add(cs->first, priority_of(cs->first));
          break;
        case cross::Action::abort:
          abort_cross(cs->first, false);
          break;
        case cross::Action::wait:
          break;
      }
    }
  }

  Tick priority_of(const TxId& id) const {
    const auto* r = find_rec(id);
    if (!r->intents.empty()) return intents_[r->intents.front()].submitted;
    return r->tx.submit_time;
  }

  void commit_cross(const TxId& id) {
    auto& r = rec(id);
    auto& cs = coord_[r.route.output_shard].at(id);
    cs.resolution = cross::Resolution::committed;
    atomicity_.resolved(id, true);
    const Epoch e = epoch_;
    for (auto f : r.route.foreign_inputs()) {
      count_bytes("commit_notice", chain::encoded_size(r.tx), m_);
      ++cross_msgs_;
      at(now_ + dmax_, kDeliver, [this, f, id, e] {
        --cross_msgs_;
        if (e == epoch_) apply_commit_notice(f, id);
        check_quiescence();
      });
    }
  }

  void apply_commit_notice(ShardId f, const TxId& id) {
    const auto& tx = rec(id).tx;
    for (const auto& in : tx.inputs) {
      if (ledgers_[f].owns(in)) atomicity_.spent(id, in.utxo);
    }
    if (!ledgers_[f].spend(tx)) {
      ++report_.atomicity_violations;
      fail("cross-shard atomicity", "input shard " + std::to_string(f) + " cannot spend committed transaction " +
                                        short_hex(id));
      return;
    }
    release_reservations(f, [&id](const Reservation& r) { return r.tx == id; });
    trace({{"event", "spend"}, {"shard", f}, {"tx", short_hex(id)}});
  }

  void abort_cross(const TxId& id, bool forced) {
    auto& r = rec(id);
    auto& cs = coord_[r.route.output_shard].at(id);
    if (cs.resolution != cross::Resolution::pending) return;
    cs.resolution = cross::Resolution::aborted;
    atomicity_.resolved(id, false);
    ++report_.cross_aborted;
    ++report_.epochs.back().cross_aborted;
    mempools_[r.route.output_shard].remove(id);
    trace({{"event", "abort"}, {"tx", short_hex(id)}, {"forced", forced}});
    const auto foreign = r.route.foreign_inputs();
    r.pending_releases = foreign.size();
    if (foreign.empty()) {
      version_failed(id, true);
      return;
    }
    const Epoch e = epoch_;
    for (auto f : foreign) {
      if (forced) {
        apply_abort_notice(f, id);
        continue;
      }
      count_bytes("abort_notice", 32, m_);
      ++cross_msgs_;
      at(now_ + dmax_, kDeliver, [this, f, id, e] {
        --cross_msgs_;
        if (e == epoch_) apply_abort_notice(f, id);
        check_quiescence();
      });
    }
  }

  void apply_abort_notice(ShardId f, const TxId& id) {
    auto& r = rec(id);
    aborted_[f].insert(id);
    for (const auto& in : r.tx.inputs) {
      if (ledgers_[f].owns(in) && ledgers_[f].locked_by(in.utxo) == id) atomicity_.released(id, in.utxo);
    }
    ledgers_[f].release(r.tx);
    if (!mempools_[f].in_flight(id)) mempools_[f].remove(id);
    release_reservations(f, [&id](const Reservation& x) { return x.tx == id; });
    if (r.pending_releases > 0 && --r.pending_releases == 0) version_failed(id, true);
  }

  void abort_timer(const TxId& id, Epoch e) {
    if (e != epoch_) return;
    const auto& r = rec(id);
    auto cs = coord_[r.route.output_shard].find(id);
    if (cs == coord_[r.route.output_shard].end()) return;
    if (cs->second.resolution == cross::Resolution::pending && cross::resolve(cs->second) == cross::Action::wait) {
      abort_cross(id, false);
    }
  }

  // ---- workload ---------------------------------------------------------

  /// A version that will never commit: its payer gets the coins back (if
  /// still unspent) and its payments go back in line by age.
  void version_failed(const TxId& id, bool return_coins) {
    auto& r = rec(id);
    if (r.intents.empty()) return;
    auto& payer = validators_[intents_[r.intents.front()].payer.value];
    bool any = false;
    for (auto i : r.intents) {
      auto& in = intents_[i];
      if (in.done || in.live != id) continue;
      in.live.reset();
      payer.waiting.insert(std::lower_bound(payer.waiting.begin(), payer.waiting.end(), i), i);
      any = true;
    }
    if (!any || !return_coins) return;
    for (const auto& x : r.tx.inputs) {
      auto u = ledgers_[cross::input_shard_of(x, k_)].find(x.utxo);
      if (u && u->spent_state == chain::SpentState::unspent) payer.coins[u->address] = *u;
    }
  }

  void workload_tick() {
    if (stopped_ || finished_) return;
    if (issuing_open_) {
      for (auto& v : validators_) {
        if (v.malicious) continue;
        if (v.waiting.empty() && submissions_open_ && workload_rng_.next_unit() < cfg_.workload_rate) {
          new_intent(v);
        }
        while (issue(v)) {
        }
      }
    }
    if (draining_ && (intents_done_ == intents_.size() || now_ >= drain_deadline_)) {
      draining_ = false;
      close_shards();
    }
    at(now_ + 1, kWorkload, [this] { workload_tick(); });
  }

  void new_intent(Validator& v) {
    Intent in;
    in.payer = v.id;
    auto other = static_cast<std::uint32_t>(workload_rng_.next_int(cfg_.n - 1));
    if (other >= v.id.value) ++other;
    in.payee = ValidatorId{other};
    in.amount = 1 + workload_rng_.next_int(std::max<std::uint64_t>(1, cfg_.genesis_value / 10));
    in.want_cross = k_ > 1 && workload_rng_.next_unit() < cfg_.cross_shard_fraction;
    in.submitted = now_;
    in.epoch = epoch_;
    intents_.push_back(in);
    v.waiting.push_back(intents_.size() - 1);
    ++report_.submitted;
    ++report_.liveness.intents;
    ++report_.epochs.back().submitted;
  }

  /// Pays the oldest waiting payments, several at once when a payer has a
  /// backlog, so retries after a forced abort do not queue behind each
  /// other on the payer's single consolidated coin. False when nothing
  /// could be issued.
  bool issue(Validator& payer) {
    while (!payer.waiting.empty()) {
      const Intent& in = intents_[payer.waiting.front()];
      if (!in.done && !in.live) break;
      payer.waiting.pop_front();
    }
    if (payer.waiting.empty()) return false;

    std::uint64_t funds = 0;
    for (const auto& [a, u] : payer.coins) funds += u.value;
    std::vector<std::uint64_t> batch;
    std::uint64_t amount = 0;
    for (auto i : payer.waiting) {
      const Intent& in = intents_[i];
      if (in.done || in.live) continue;
      if (batch.size() == kMaxBatch || amount + in.amount + kMaxFee + 1 > funds) break;
      batch.push_back(i);
      amount += in.amount;
    }
    if (batch.empty()) return false;
    const bool want_cross = intents_[batch.front()].want_cross;
    const std::uint64_t need = amount + kMaxFee + 1;

    std::vector<Utxo> picked;
    for (const auto& [a, u] : payer.coins) {
      if (u.value >= need) {
        picked.push_back(u);
        break;
      }
    }
    if (picked.empty()) {
      std::vector<Utxo> all;
      for (const auto& [a, u] : payer.coins) all.push_back(u);
      std::sort(all.begin(), all.end(), [](const Utxo& x, const Utxo& y) {
        return x.value != y.value ? x.value > y.value : x.address < y.address;
      });
      std::uint64_t sum = 0;
      for (const auto& u : all) {
        picked.push_back(u);
        sum += u.value;
        if (sum >= need) break;
      }
    } else if (want_cross && payer.coins.size() >= 2 && workload_rng_.next_unit() < 0.25) {
      for (const auto& [a, u] : payer.coins) {
        if (a != picked.front().address) {
          picked.push_back(u);
          break;
        }
      }
    }
    std::uint64_t total = 0;
    for (const auto& u : picked) total += u.value;
    const bool split = payer.coins.size() - picked.size() < 3;

    Transaction tx;
    for (const auto& u : picked) tx.inputs.push_back(chain::TxInput{u.address, u.origin_tx, u.value, {}});
    // A retried payment must not reuse an earlier version's id: late
    // messages about the old version would otherwise apply to the new one.
    auto build = [&](std::uint64_t fee) {
      tx.fee = fee;
      tx.outputs.clear();
      for (auto i : batch) {
        tx.outputs.push_back(chain::TxOutput{validators_[intents_[i].payee.value].key.public_key, intents_[i].amount});
      }
      const std::uint64_t change = total - amount - fee;
      if (split && change >= 2) {
        tx.outputs.push_back(chain::TxOutput{payer.key.public_key, change / 2});
        tx.outputs.push_back(chain::TxOutput{payer.key.public_key, change - change / 2});
      } else if (change > 0) {
        tx.outputs.push_back(chain::TxOutput{payer.key.public_key, change});
      }
      tx.id = chain::tx_id(tx);
      return !store_.contains(tx.id);
    };
    std::uint64_t fallback = 0;  // fresh id, wrong routing
    bool found = false;
    for (std::uint64_t fee = 1; fee <= kMaxFee && !found; ++fee) {
      if (!build(fee)) continue;
      found = cross::route_tx(tx, k_).cross() == want_cross;
      if (!found && fallback == 0) fallback = fee;
    }
    if (!found) {
      if (fallback == 0) return false;
      build(fallback);
    }
    tx.submit_time = now_;
    std::vector<const crypto::KeyPair*> signers(tx.inputs.size(), &payer.key);
    chain::sign_transaction(tx, signers, *scheme_);
    for (const auto& u : picked) payer.coins.erase(u.address);

    for (auto i : batch) {
      Intent& in = intents_[i];
      ++in.versions;
      if (in.versions > 1) ++report_.liveness.reissued_versions;
      in.live = tx.id;
    }
    submit(std::move(tx), std::move(batch));
    return true;
  }

  void submit(Transaction tx, std::vector<std::uint64_t> intents) {
    TxRecord r;
    r.route = cross::route_tx(tx, k_);
    r.intents = std::move(intents);
    r.well_formed = chain::well_formed(tx);
    r.tx = std::move(tx);
    const TxId id = r.tx.id;
    const auto route = r.route;
    count_bytes("tx", chain::encoded_size(r.tx), cfg_.n - 1);
    store_.insert_or_assign(id, std::move(r));
    const auto& paid = rec(id).intents;
    const Tick prio = intents_[paid.front()].submitted;
    trace({{"event", "submit"},
           {"tx", short_hex(id)},
           {"intents", paid},
           {"payer", intents_[paid.front()].payer.value},
           {"cross", route.cross()},
           {"shard", route.output_shard}});
    if (!route.cross()) {
      mempools_[route.output_shard].add(id, prio);
      return;
    }
    cross::CrossTxState cs;
    cs.id = id;
    cs.route = route;
    cs.opened = now_;
    coord_[route.output_shard][id] = std::move(cs);
    atomicity_.opened(rec(id).tx);
    for (auto f : route.foreign_inputs()) mempools_[f].add(id, prio);
    if (route.foreign_inputs().empty()) mempools_[route.output_shard].add(id, prio);
    const Epoch e = epoch_;
    at(now_ + cfg_.abort_timeout, kTimer, [this, id, e] { abort_timer(id, e); });
  }

  // ---- report -------------------------------------------------------------

  void finalize() {
    if (report_.total_ticks == 0) report_.total_ticks = now_;
    report_.throughput = report_.total_ticks
                             ? static_cast<double>(report_.committed) /
                                   (static_cast<double>(report_.total_ticks) * cfg_.seconds_per_tick)
                             : 0.0;
    report_.mean_latency = report_.committed ? latency_sum_ / static_cast<double>(report_.committed) : 0.0;
    double transition = 0;
    std::size_t closed = 0;
    for (const auto& e : report_.epochs) {
      if (e.next_start == 0) continue;
      transition += static_cast<double>(e.transition_latency);
      ++closed;
    }
    report_.mean_transition_latency = closed ? transition / static_cast<double>(closed) : 0.0;
    for (const auto& v : validators_) {
      ValidatorRecord r;
      r.id = v.id;
      r.capability = v.capability;
      r.malicious = v.malicious;
      r.earned = v.earned;
      r.cumulative = v.cumulative;
      r.times_leader = v.times_leader;
      report_.validators.push_back(std::move(r));
    }
  }

  // ---- state ----------------------------------------------------------

  ScenarioConfig cfg_;
  RunOptions opts_;
  std::unique_ptr<crypto::SignatureScheme> scheme_;
  std::size_t k_;
  std::size_t m_;
  Tick dmax_;
  crypto::Seed master_;
  crypto::SeededRng behavior_rng_;
  crypto::SeededRng workload_rng_;

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t seq_ = 0;
  Tick now_ = 0;
  bool stopped_ = false;
  bool finished_ = false;

  std::vector<Validator> validators_;
  std::map<crypto::PublicKey, ValidatorId> owner_of_;
  std::vector<cross::ShardLedger> ledgers_;
  std::vector<Mempool> mempools_;
  std::vector<std::map<TxId, cross::CrossTxState>> coord_;
  std::vector<std::set<TxId>> aborted_;
  std::unordered_map<TxId, TxRecord, HashKey> store_;
  std::vector<Intent> intents_;
  std::uint64_t intents_done_ = 0;
  std::uint64_t injections_ = 0;

  Epoch epoch_ = 0;
  std::vector<ShardRt> shards_;
  reputation::EpochScoreBook book_;
  reputation::ReputationHistory history_;
  bool issuing_open_ = false;
  bool submissions_open_ = true;
  bool draining_ = false;
  bool closing_ = false;
  bool barrier_scheduled_ = false;
  Tick drain_deadline_ = 0;
  std::uint64_t cross_msgs_ = 0;

  SafetyChecker safety_;
  AtomicityChecker atomicity_;

  MetricsReport report_;
  std::string trace_;
  double latency_sum_ = 0;
  double epoch_latency_sum_ = 0;
  std::uint64_t epoch_latency_n_ = 0;
};

}  // namespace

RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  config.validate();
  Simulator sim(config, options);
  return sim.run();
}

}  // namespace repchain::sim
