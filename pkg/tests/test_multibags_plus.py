import random

import pytest

from futurerd import engine, oracle
from futurerd.dsu import SetRecord
from futurerd.errors import InputError, InvariantError
from futurerd.generators import gen_lcs_general, gen_random
from futurerd.multibags import MultiBags
from futurerd.multibags_plus import MultiBagsPlus
from helpers import cr, gt, oracle_answers, replay_collect, rt, seq_of, sp, sp_reaches, sy


def drive(events, after=None):
    mbp = MultiBagsPlus()
    engine.replay(seq_of(*events), mbp, after_strand=after)
    return mbp


def nsp_sets(mbp, n_strands):
    """Map live cross-dag set -> members, over strand elements only."""
    groups = {}
    for s in range(n_strands):
        groups.setdefault(mbp.d_nsp.find(s), []).append(s)
    return groups


# -- basic set formation ------------------------------------------------------


def test_serial_chain_collapses_to_one_set():
    # spawn/sync of one child: fork, child, continuation, and join all end up
    # in a single cross-dag set once the join runs.
    mbp = drive([sp(1), rt(), sy()])
    groups = nsp_sets(mbp, 4)
    assert len(groups) == 1
    assert sorted(next(iter(groups.values()))) == [0, 1, 2, 3]
    assert mbp.attached_sets == 1  # just the root's initial set


def test_spawned_child_starts_fresh_set_with_inherited_pred():
    mbp = MultiBagsPlus()
    info = {}

    def after(s):
        if s == 1:
            sid = mbp.d_nsp.find(1)
            info["child_set"] = sid
            info["att_pred"] = mbp.d_nsp.record(sid).att_pred

    engine.replay(seq_of(sp(1), rt(), sy()), mbp, after_strand=after)
    assert info["child_set"] != 0
    assert info["att_pred"] == mbp.d_nsp.find(0)  # the root's attached set
    assert mbp.d_nsp.record(info["att_pred"]).attached


def test_attachify_is_idempotent():
    mbp = MultiBagsPlus()
    engine.replay(seq_of(sp(1), rt(), sy()), mbp, after_strand=None)
    sid = mbp.d_nsp.find(0)
    before = len(mbp.r)
    n1 = mbp._attachify(sid)
    n2 = mbp._attachify(sid)
    assert n1 == n2
    assert len(mbp.r) == before  # already attached: no new node


def test_never_unions_two_attached_sets():
    mbp = MultiBagsPlus()
    a = mbp.d_nsp.make_set(SetRecord(attached=True, r_node=mbp.r.add_node()))
    b = mbp.d_nsp.make_set(SetRecord(attached=True, r_node=mbp.r.add_node()))
    with pytest.raises(InvariantError):
        mbp._nsp_union(a, b)
    c = mbp.d_nsp.make_set(SetRecord(attached=False))
    with pytest.raises(InvariantError):
        mbp._nsp_union(c, a)  # attached side must survive


# -- create -------------------------------------------------------------------


def test_single_create_makes_exactly_three_attached_sets():
    mbp = drive([cr(1, 1), rt()])
    assert mbp.attached_sets == 3  # creator's, future's, continuation's
    s_creator = mbp.d_nsp.find(0)
    s_future = mbp.d_nsp.find(1)
    s_cont = mbp.d_nsp.find(2)
    assert len({s_creator, s_future, s_cont}) == 3
    for sid in (s_creator, s_future, s_cont):
        assert mbp.d_nsp.record(sid).attached
    rn = lambda sid: mbp.d_nsp.record(sid).r_node
    assert mbp.r.reach(rn(s_creator), rn(s_future))
    assert mbp.r.reach(rn(s_creator), rn(s_cont))
    assert not mbp.r.reach(rn(s_future), rn(s_cont))


def test_creator_precedes_future_body_via_query():
    mbp = MultiBagsPlus()
    answers = replay_collect(seq_of(cr(1, 1), rt()), mbp)
    assert 0 in answers[1]
    assert 1 not in answers[2]  # body parallel with continuation until get


# -- get ----------------------------------------------------------------------


def test_get_orders_future_and_pre_get_strand():
    seq = seq_of(cr(1, 1), rt(), gt(1))
    mbp = MultiBagsPlus()
    answers = replay_collect(seq, mbp)
    assert answers == oracle_answers(seq)
    assert answers[3] == {0, 1, 2}  # both the future's sink and the pre-get strand


def test_two_gets_from_different_frames():
    # the future is joined by a sibling and by the root: both getter strands
    # are ordered after the future's sink.
    seq = seq_of(cr(1, 1), rt(), cr(2, 2), gt(1), rt(), gt(1))
    truth = oracle_answers(seq)
    mbp = MultiBagsPlus()
    assert replay_collect(seq, mbp) == truth
    assert seq.counts.strands == 7
    sink = 1
    for getter in oracle.build(seq).getters_of[1]:
        assert truth[getter] >= {sink}


def test_unknown_or_open_handle_rejected():
    with pytest.raises(InputError, match="unknown handle"):
        drive([gt(4)])
    with pytest.raises(InputError, match="before its future returned"):
        drive([cr(1, 1), gt(1), rt()])  # get from inside the open future


def test_duplicate_handle_rejected():
    with pytest.raises(InputError, match="duplicate"):
        drive([cr(1, 3), rt(), cr(2, 3), rt()])


# -- sync case analysis ---------------------------------------------------------


def test_sync_pure_fork_join_adds_no_dag_nodes():
    # two nested spawn/sync pairs, no futures: everything collapses, the
    # reachability dag never grows past the root set.
    mbp = drive([sp(1), rt(), sy(), sp(2), sp(3), rt(), sy(), rt(), sy()])
    assert mbp.attached_sets == 1
    assert mbp.both_attached_syncs == 0
    groups = nsp_sets(mbp, 10)
    assert len(groups) == 1


def test_sync_one_attached_side_sets_att_succ():
    # left branch (the spawned child) contains a create, right branch is
    # plain: after the sync the plain side keeps its set and points at the
    # set that received the join node.
    events = [sp(1), cr(2, 2), rt(), gt(2), rt(), sy()]
    seq = seq_of(*events)
    mbp = MultiBagsPlus()
    right_set = {}

    def after(s):
        if s == 5:  # the continuation strand in the root, before the sync
            right_set["sid"] = mbp.d_nsp.find(5)

    engine.replay(seq, mbp, after_strand=after)
    # 12 strands? count: 1 + 6 control = 7
    assert seq.counts.strands == 7
    sid = right_set["sid"]
    rec = mbp.d_nsp.record(sid)
    assert not rec.attached
    assert rec.att_succ is not None
    join_set = mbp.d_nsp.find(6)
    assert rec.att_succ == join_set
    assert replay_collect(seq, MultiBagsPlus()) == oracle_answers(seq)


def test_sync_both_attached_adds_at_most_two_nodes():
    # both branches perform a create+get: both sink sets are attached at the
    # join.
    events = [
        sp(1), cr(2, 2), rt(), gt(2), rt(),   # left child with a future
        cr(3, 3), rt(), gt(3),                 # right (continuation) future
        sy(),
    ]
    seq = seq_of(*events)
    mbp = MultiBagsPlus()
    nodes_before = {}

    def after(s):
        nodes_before[s] = mbp.attached_sets

    engine.replay(seq, mbp, after_strand=after)
    join = seq.counts.strands - 1
    added_at_sync = nodes_before[join] - nodes_before[join - 1]
    assert added_at_sync <= 2
    assert mbp.both_attached_syncs == 1
    assert replay_collect(seq, MultiBagsPlus()) == oracle_answers(seq)


def test_sync_without_outstanding_child():
    with pytest.raises(InputError):
        drive([sy()])


# -- return ---------------------------------------------------------------------


def test_return_relabels_and_records_sink():
    from futurerd.dsu import LABEL_P

    mbp = drive([cr(1, 1), rt()])
    assert mbp.d_sp.record(mbp.d_sp.find(1)).label == LABEL_P
    assert mbp._handles[1].sink_elem == 1
    with pytest.raises(InputError):
        drive([rt()])


# -- query cross-checks -----------------------------------------------------------


def test_matches_structured_algorithm_on_structured_traces():
    for seed in range(25):
        seq = gen_random(n_events=90, p_spawn=0.2, p_create=0.0, p_get=0.0, seed=seed)
        assert seq.counts.strands <= 100
        a = replay_collect(seq, MultiBags())
        b = replay_collect(seq, MultiBagsPlus())
        assert a == b, seed


def test_lcs_general_3x3_reachability():
    seq = gen_lcs_general(3, seed=0)
    dag = oracle.build(seq)
    mbp = MultiBagsPlus()
    answers = replay_collect(seq, mbp)
    assert answers == {s: frozenset(u for u in range(s) if dag.reaches(u, s))
                       for s in range(dag.n)}
    # block handles are 1 + i*n + j; corner (0,0)'s work precedes the strands
    # of (2,2) that run after its joins (its sink), via chained get edges
    assert dag.reaches(dag.first_of[1], dag.sink_of[9])
    # anti-diagonal corners (0,2) and (2,0) are mutually parallel throughout
    for a in (dag.first_of[3], dag.sink_of[3]):
        for b in (dag.first_of[7], dag.sink_of[7]):
            assert not dag.reaches(a, b) and not dag.reaches(b, a)


def test_matches_oracle_on_random_general_traces():
    for seed in range(30):
        seq = gen_random(n_events=130, p_spawn=0.14, p_create=0.14, p_get=0.12, seed=seed)
        mbp = MultiBagsPlus()
        assert replay_collect(seq, mbp) == oracle_answers(seq), seed


# -- structural properties of the set partition ----------------------------------


def _materialized_edges(dag, upto):
    """Edges of the dag whose target strand has begun by strand `upto`."""
    for u, v, kind in dag.edges():
        if v <= upto:
            yield u, v, kind


def test_unattached_sets_have_no_incident_cross_edges():
    # At every step, members of unattached sets are untouched by create/get
    # edges materialized so far, and form one connected piece of SP edges.
    for seed in (3, 8, 21):
        seq = gen_random(n_events=110, p_spawn=0.15, p_create=0.15, p_get=0.1, seed=seed)
        dag = oracle.build(seq)
        mbp = MultiBagsPlus()

        def after(s):
            groups = {}
            for u in range(s + 1):
                sid = mbp.d_nsp.find(u)
                if not mbp.d_nsp.record(sid).attached:
                    groups.setdefault(sid, set()).add(u)
            if not groups:
                return
            touched = {}
            sp_adj = {}
            for u, v, kind in _materialized_edges(dag, s):
                if kind in ("create", "get"):
                    touched.setdefault(u, True)
                    touched.setdefault(v, True)
                else:
                    sp_adj.setdefault(u, []).append(v)
                    sp_adj.setdefault(v, []).append(u)
            for sid, members in groups.items():
                assert not any(m in touched for m in members), (seed, s, sid)
                # connectivity over SP edges restricted to the set
                seen = set()
                stack = [next(iter(members))]
                while stack:
                    x = stack.pop()
                    if x in seen:
                        continue
                    seen.add(x)
                    for y in sp_adj.get(x, ()):
                        if y in members and y not in seen:
                            stack.append(y)
                assert seen == members, (seed, s, sid)

        engine.replay(seq, mbp, after_strand=after)


def test_att_pred_members_precede_set_members():
    # Whenever a set is unattached, every strand of its attached predecessor
    # reaches every strand of the set over SP edges alone.
    for seed in (2, 14):
        seq = gen_random(n_events=80, p_spawn=0.16, p_create=0.14, p_get=0.1, seed=seed)
        assert seq.counts.strands <= 60 or True
        dag = oracle.build(seq)
        sp_desc = sp_reaches(dag)
        mbp = MultiBagsPlus()

        def after(s):
            membership = {}
            for u in range(s + 1):
                membership.setdefault(mbp.d_nsp.find(u), set()).add(u)
            for sid, members in membership.items():
                rec = mbp.d_nsp.record(sid)
                if rec.attached:
                    continue
                pred_members = membership.get(rec.att_pred, set())
                for a in pred_members:
                    for v in members:
                        assert (sp_desc[a] >> v) & 1, (seed, s, a, v)

        engine.replay(seq, mbp, after_strand=after)


def test_att_succ_contains_a_common_successor():
    # A set's attached successor holds at least one strand (the join node)
    # that every member of the set reaches.
    for seed in (5, 17):
        seq = gen_random(n_events=90, p_spawn=0.2, p_create=0.12, p_get=0.08, seed=seed)
        dag = oracle.build(seq)
        mbp = MultiBagsPlus()
        engine.replay(seq, mbp)
        membership = {}
        for u in range(dag.n):
            membership.setdefault(mbp.d_nsp.find(u), set()).add(u)
        checked = 0
        for sid, members in membership.items():
            rec = mbp.d_nsp.record(sid)
            if rec.attached or rec.att_succ is None:
                continue
            succ_members = membership.get(rec.att_succ, set())
            assert any(
                all(dag.reaches(u, w) for u in members) for w in succ_members
            ), (seed, sid)
            checked += 1
        assert checked > 0 or seq.counts.syncs == 0


def test_attached_budget_per_trace():
    rng = random.Random(0)
    for _ in range(15):
        seq = gen_random(
            n_events=rng.randrange(60, 220),
            p_spawn=rng.uniform(0, 0.3),
            p_create=rng.uniform(0, 0.3),
            p_get=rng.uniform(0, 0.3),
            seed=rng.randrange(10_000),
        )
        mbp = MultiBagsPlus()
        engine.replay(seq, mbp)
        c = seq.counts
        assert mbp.attached_sets <= 3 * c.creates + 2 * c.gets + 2 * mbp.both_attached_syncs + 1
