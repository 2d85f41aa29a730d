//! Property tests. Instances come from the seeded corpus generators, with the seed
//! drawn by proptest, so failures shrink to a seed that replays exactly.

use std::collections::VecDeque;

use proptest::prelude::*;

use regtree::algebras::{recognises, Reach, ReachabilityAlgebra};
use regtree::automata::game::strategy_wins;
use regtree::automata::{accepts, bisim_closure, check_run, compile_algebra, dpa_for, zielonka, AcceptanceSpec, Player};
use regtree::corpus::{alphabet, Gen, Shape};
use regtree::equiv::{bisimilar_systems, minimize, unfold_equivalent};
use regtree::model::alphabet::RankedAlphabet;
use regtree::model::canon::{canonical_form, isomorphic};
use regtree::model::json::{system_from_json, system_to_json};
use regtree::model::ts::encode_ts;
use regtree::model::{SetSystem, Sym, Target};
use regtree::monad::{flatten, hole_vertex, pieces, plant, plug, recompose, uproot};
use regtree::morphism::{check_morphism, compose, find_morphism};
use regtree::resolutions::{yield_subsumed, Bounds};
use regtree::ya::shipped::{self, avoid, avoid_ts};
use regtree::ya::{presentation_accepts, universal_branch_check, YLabel};

fn sigma() -> RankedAlphabet {
    alphabet(&[("a2", 2), ("a1", 1), ("b1", 1), ("c0", 0)])
}

fn b_reachable(s: &SetSystem<Sym>) -> bool {
    let mut seen = vec![false; s.len()];
    let mut queue: VecDeque<usize> = s.initial().into_iter().collect();
    for &v in &queue {
        seen[v] = true;
    }
    while let Some(v) = queue.pop_front() {
        if s.vertices[v].label.name.starts_with('b') {
            return true;
        }
        for (_, t) in s.out(v) {
            if let Target::Vertex(w) = t {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let s = Gen::new(seed).set_system(&sigma(), 2, Shape::set_system(5));
        let back = system_from_json(&system_to_json(&s), None).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn canonical_form_ignores_vertex_order(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let s = g.set_system(&sigma(), 1, Shape::set_system(5));
        let mut order: Vec<usize> = (0..s.len()).collect();
        use rand::seq::SliceRandom;
        order.shuffle(g.rng());
        let mut t = SetSystem::new(s.rank);
        let mut pos = vec![0; s.len()];
        for &v in &order {
            let x = &s.vertices[v];
            pos[v] = t.add_vertex(x.id.clone(), x.label.clone(), x.initial, x.root);
        }
        for e in &s.edges {
            match e.tgt {
                Target::Vertex(w) => t.add_edge(pos[e.src], e.dir, pos[w]),
                Target::Var(x) => t.add_var_edge(pos[e.src], e.dir, x),
            }
        }
        prop_assert_eq!(canonical_form(&s), canonical_form(&t));
    }

    #[test]
    fn plant_then_uproot_keeps_roots(seed in any::<u64>()) {
        let s = Gen::new(seed).set_system(&sigma(), 1, Shape::set_system(4));
        let up = uproot(&plant(&s));
        prop_assert_eq!(up.roots().len(), 0);
        prop_assert!(isomorphic(&plant(&up), &plant(&s)));
    }

    #[test]
    fn flatten_of_inner_unfoldings_is_equivalent(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let alpha = sigma();
        let n = g.shaped(0, Shape::system(3), &mut |g| {
            let r = g.between(0, 2);
            g.system(&alpha, r, 3)
        });
        let mut n2 = n.clone();
        for v in &mut n2.vertices {
            v.label = g.unfolding(&v.label).0;
        }
        prop_assert!(unfold_equivalent(&flatten(&n).unwrap(), &flatten(&n2).unwrap()).unwrap().holds());
    }

    #[test]
    fn minimize_is_equivalent_and_minimal(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let s = g.system(&sigma(), 1, 5);
        let (big, _) = g.unfolding(&s);
        let m = minimize(&big).unwrap();
        prop_assert!(unfold_equivalent(&m, &s).unwrap().holds());
        prop_assert!(isomorphic(&m, &minimize(&s).unwrap()));
    }

    #[test]
    fn covers_compose(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let s = g.set_system(&sigma(), 1, Shape::set_system(3));
        let (s1, m1) = g.locally_surjective_cover(&s);
        let (s2, m2) = g.locally_surjective_cover(&s1);
        let m = compose(&m2, &m1).unwrap();
        prop_assert!(check_morphism(&s2, &s, &m).unwrap().is_locally_surjective());
    }

    #[test]
    fn morphisms_give_yield_inclusion(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let s = g.set_system(&sigma(), 0, Shape::set_system(3));
        let (s2, _) = g.locally_surjective_cover(&s);
        prop_assert!(!yield_subsumed(&s2, &s, Bounds::memory(1)).unwrap().is_refuted());
        prop_assert!(!yield_subsumed(&s, &s2, Bounds::memory(1)).unwrap().is_refuted());
    }

    #[test]
    fn recomposition_maps_onto_context(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let k = g.between(1, 3);
        let c = g.context(&sigma(), k, Shape::set_system(4));
        let h = hole_vertex(&c).unwrap();
        let r = recompose(&pieces(&c).unwrap(), c.vertices[h].label.clone()).unwrap();
        let map = find_morphism(&r, &c).expect("recomposition maps onto the context");
        prop_assert!(check_morphism(&r, &c, &map).unwrap().is_morphism());
    }

    #[test]
    fn plugging_a_system_into_a_system_context(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let k = g.between(1, 2);
        let c = g.context(&sigma(), k, Shape::system(3));
        let s = g.system(&sigma(), k, 3);
        prop_assert!(plug(&c, &s).unwrap().is_system());
    }

    #[test]
    fn reachability_recognition(seed in any::<u64>()) {
        let s = Gen::new(seed).system(&sigma(), 0, 8);
        let alg = ReachabilityAlgebra::new(["b1"]);
        prop_assert_eq!(recognises(&alg, &[Reach::bottom(0)], &s).unwrap(), b_reachable(&s));
    }

    #[test]
    fn accepts_is_unfold_invariant(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let aut = compile_algebra(&avoid()).unwrap();
        let s = g.system(&sigma(), 0, 5);
        let (t, _) = g.unfolding(&s);
        prop_assert_eq!(accepts(&aut, &s).unwrap().accepted, accepts(&aut, &t).unwrap().accepted);
    }

    #[test]
    fn returned_runs_check(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let name = *g.pick(&shipped::NAMES);
        let p = shipped::by_name(name).unwrap();
        let aut = compile_algebra(&p).unwrap();
        let alpha = alphabet(&[("a2", 2), ("a1", 1), ("b1", 1), ("b2", 2), ("c0", 0), ("b0", 0)]);
        let s = g.system(&alpha, 0, 4);
        let m = accepts(&aut, &s).unwrap();
        if let Some(run) = &m.run {
            prop_assert!(check_run(&aut, &s, run).unwrap().ok);
        }
        prop_assert_eq!(m.run.is_some(), m.accepted);
    }

    #[test]
    fn engines_agree(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let name = *g.pick(&shipped::NAMES);
        let p = shipped::by_name(name).unwrap();
        let wilke = compile_algebra(&p).unwrap();
        let dpa = wilke.with_omega(AcceptanceSpec::Dpa { dpa: dpa_for(name).unwrap() }).unwrap();
        let alpha = alphabet(&[("a2", 2), ("a1", 1), ("b1", 1), ("c0", 0), ("b0", 0)]);
        let s = g.system(&alpha, 0, 5);
        let x = accepts(&wilke, &s).unwrap();
        let y = accepts(&dpa, &s).unwrap();
        prop_assert_eq!(x.accepted, y.accepted);
        prop_assert_eq!(x.accepted, presentation_accepts(&p, &s).unwrap());
        if let Some(run) = &y.run {
            prop_assert!(check_run(&dpa, &s, run).unwrap().ok);
        }
    }

    #[test]
    fn closure_keeps_accepted_systems(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let aut = compile_algebra(&avoid_ts(3)).unwrap();
        let closed = bisim_closure(&aut).unwrap();
        let ts = g.transition_system(5, &["b"], 3);
        let s = encode_ts(&ts, None);
        if accepts(&aut, &s).unwrap().accepted {
            prop_assert!(accepts(&closed, &s).unwrap().accepted);
        }
        let twin = g.bisimilar_encoding(&ts, 3);
        prop_assert!(bisimilar_systems(&s, &twin).unwrap().holds());
    }

    #[test]
    fn branch_check_matches_words_on_chains(seed in any::<u64>()) {
        // a chain of unary values ending in a terminal has exactly one branch
        let mut g = Gen::new(seed);
        let p = shipped::by_name(g.pick(&shipped::NAMES)).unwrap();
        let len = g.between(0, 6);
        let word: Vec<usize> = (0..len).map(|_| g.below(p.y1.len())).collect();
        let t = g.below(p.y0.len());
        let mut chain = SetSystem::new(0);
        for (i, &y) in word.iter().enumerate() {
            chain.add_vertex(format!("v{i}"), YLabel::One(y), i == 0, false);
        }
        let last = chain.add_vertex("t", YLabel::Zero(t), word.is_empty(), false);
        for i in 0..len {
            chain.add_edge(i, 1, if i + 1 == len { last } else { i + 1 });
        }
        let expect = p.accepting.contains(&regtree::ya::eval_word(&p, &word, t));
        prop_assert_eq!(universal_branch_check(&p, &chain).unwrap().accepted, expect);
    }

    #[test]
    fn zielonka_strategies_win(seed in any::<u64>()) {
        let game = Gen::new(seed).parity_game(10, 5);
        let sol = zielonka(&game);
        prop_assert!(strategy_wins(&game, &sol, Player::Eve));
        prop_assert!(strategy_wins(&game, &sol, Player::Adam));
    }
}
