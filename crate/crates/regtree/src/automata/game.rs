//! Parity games with the min-even convention, solved by Zielonka's recursion.

use serde::{Deserialize, Serialize};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    Eve,
    Adam,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Eve => Player::Adam,
            Player::Adam => Player::Eve,
        }
    }

    /// The player favoured by a priority: even is Eve's.
    pub fn of_priority(p: usize) -> Player {
        if p.is_multiple_of(2) {
            Player::Eve
        } else {
            Player::Adam
        }
    }
}

/// A finite parity game. Eve wins a play iff the least priority seen infinitely
/// often is even.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityGame {
    pub owner: Vec<Player>,
    pub priority: Vec<usize>,
    pub moves: Vec<Vec<usize>>,
    pub initial: usize,
}

/// Winner per position, and one move for each position won by its owner.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Solution {
    pub winner: Vec<Player>,
    pub strategy: Vec<Option<usize>>,
}

impl ParityGame {
    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn add(&mut self, owner: Player, priority: usize) -> usize {
        self.owner.push(owner);
        self.priority.push(priority);
        self.moves.push(Vec::new());
        self.owner.len() - 1
    }

    /// Give every dead end a move to a sink its owner loses.
    pub fn close_dead_ends(&mut self) {
        let mut sinks = [None, None];
        for v in 0..self.len() {
            if !self.moves[v].is_empty() {
                continue;
            }
            let loser = self.owner[v];
            let slot = usize::from(loser == Player::Adam);
            let sink = match sinks[slot] {
                Some(s) => s,
                None => {
                    // A sink of priority 1 is lost by Eve, of priority 0 by Adam.
                    let s = self.add(loser, usize::from(loser == Player::Eve));
                    self.moves[s].push(s);
                    sinks[slot] = Some(s);
                    s
                }
            };
            self.moves[v].push(sink);
        }
    }

    fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pred = vec![Vec::new(); self.len()];
        for (v, ms) in self.moves.iter().enumerate() {
            for &w in ms {
                pred[w].push(v);
            }
        }
        pred
    }
}

struct Solver<'a> {
    g: &'a ParityGame,
    pred: Vec<Vec<usize>>,
}

impl Solver<'_> {
    /// Positions from which `player` forces a visit to `target` inside `alive`,
    /// recording the attracting move for `player`'s positions.
    fn attractor(&self, alive: &[bool], target: &[usize], player: Player, strategy: &mut [Option<usize>]) -> Vec<bool> {
        let n = self.g.len();
        let mut inside = vec![false; n];
        let mut count: Vec<usize> = (0..n).map(|v| if alive[v] { self.g.moves[v].iter().filter(|&&w| alive[w]).count() } else { 0 }).collect();
        let mut queue: Vec<usize> = Vec::new();
        for &t in target {
            if alive[t] && !inside[t] {
                inside[t] = true;
                queue.push(t);
            }
        }
        while let Some(w) = queue.pop() {
            for &v in &self.pred[w] {
                if !alive[v] || inside[v] {
                    continue;
                }
                if self.g.owner[v] == player {
                    inside[v] = true;
                    strategy[v] = Some(w);
                    queue.push(v);
                } else {
                    count[v] -= 1;
                    if count[v] == 0 {
                        inside[v] = true;
                        queue.push(v);
                    }
                }
            }
        }
        inside
    }

    /// Returns the winning region of each player within `alive`, filling `strategy`
    /// for positions won by their owner.
    fn solve(&self, alive: &[bool], strategy: &mut [Option<usize>]) -> [Vec<bool>; 2] {
        let n = self.g.len();
        let Some(p) = (0..n).filter(|&v| alive[v]).map(|v| self.g.priority[v]).min() else {
            return [vec![false; n], vec![false; n]];
        };
        let alpha = Player::of_priority(p);
        let idx = |pl: Player| usize::from(pl == Player::Adam);
        let top: Vec<usize> = (0..n).filter(|&v| alive[v] && self.g.priority[v] == p).collect();
        let attr = self.attractor(alive, &top, alpha, strategy);
        let rest: Vec<bool> = (0..n).map(|v| alive[v] && !attr[v]).collect();
        let sub = self.solve(&rest, strategy);
        if !sub[idx(alpha.opponent())].iter().any(|&b| b) {
            // alpha wins everywhere; at the top positions it just stays inside.
            for &v in &top {
                if self.g.owner[v] == alpha {
                    strategy[v] = self.g.moves[v].iter().copied().find(|&w| alive[w]);
                }
            }
            let mut win = [vec![false; n], vec![false; n]];
            win[idx(alpha)] = alive.to_vec();
            return win;
        }
        let lost: Vec<usize> = (0..n).filter(|&v| sub[idx(alpha.opponent())][v]).collect();
        let b = self.attractor(alive, &lost, alpha.opponent(), strategy);
        let rest2: Vec<bool> = (0..n).map(|v| alive[v] && !b[v]).collect();
        let mut win = self.solve(&rest2, strategy);
        for v in 0..n {
            if b[v] {
                win[idx(alpha.opponent())][v] = true;
            }
        }
        win
    }
}

/// Solve a game whose positions all have at least one move.
pub fn zielonka(g: &ParityGame) -> Solution {
    assert!(g.moves.iter().all(|m| !m.is_empty()), "close dead ends before solving");
    let solver = Solver { g, pred: g.predecessors() };
    let mut strategy = vec![None; g.len()];
    let win = solver.solve(&vec![true; g.len()], &mut strategy);
    let winner: Vec<Player> = (0..g.len()).map(|v| if win[0][v] { Player::Eve } else { Player::Adam }).collect();
    let strategy = (0..g.len()).map(|v| if winner[v] == g.owner[v] { strategy[v] } else { None }).collect();
    Solution { winner, strategy }
}

/// Whether `adam_moves` (all moves of every position not fixed by `fixed`) admit a
/// reachable cycle whose least priority is odd, starting from `from`.
fn odd_cycle_reachable(g: &ParityGame, fixed: &[Option<usize>], from: usize) -> bool {
    let succ = |v: usize| -> Vec<usize> { fixed[v].map_or_else(|| g.moves[v].clone(), |w| vec![w]) };
    let mut reach = vec![false; g.len()];
    let mut stack = vec![from];
    reach[from] = true;
    while let Some(v) = stack.pop() {
        for w in succ(v) {
            if !reach[w] {
                reach[w] = true;
                stack.push(w);
            }
        }
    }
    let odd: Vec<usize> = (0..g.len()).filter(|&v| reach[v] && g.priority[v] % 2 == 1).map(|v| g.priority[v]).collect();
    for p in odd {
        let mut dg: DiGraph<usize, ()> = DiGraph::new();
        let nodes: Vec<_> = (0..g.len()).map(|v| dg.add_node(v)).collect();
        for v in 0..g.len() {
            if !reach[v] || g.priority[v] < p {
                continue;
            }
            for w in succ(v) {
                if reach[w] && g.priority[w] >= p {
                    dg.add_edge(nodes[v], nodes[w], ());
                }
            }
        }
        for scc in tarjan_scc(&dg) {
            let members: Vec<usize> = scc.iter().map(|&i| dg[i]).collect();
            let cyclic = members.len() > 1 || dg.contains_edge(scc[0], scc[0]);
            if cyclic && members.iter().any(|&v| g.priority[v] == p) {
                return true;
            }
        }
    }
    false
}

/// Eve's winning region by enumerating all of her positional strategies.
pub fn brute_force_winners(g: &ParityGame) -> Vec<Player> {
    let eve: Vec<usize> = (0..g.len()).filter(|&v| g.owner[v] == Player::Eve).collect();
    let mut winner = vec![Player::Adam; g.len()];
    let mut choice = vec![0usize; eve.len()];
    loop {
        let mut fixed = vec![None; g.len()];
        for (k, &v) in eve.iter().enumerate() {
            fixed[v] = Some(g.moves[v][choice[k]]);
        }
        for v in 0..g.len() {
            if winner[v] == Player::Adam && !odd_cycle_reachable(g, &fixed, v) {
                winner[v] = Player::Eve;
            }
        }
        let mut k = 0;
        loop {
            if k == eve.len() {
                return winner;
            }
            choice[k] += 1;
            if choice[k] < g.moves[eve[k]].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Whether a positional strategy for `player` wins from every position it claims.
pub fn strategy_wins(g: &ParityGame, sol: &Solution, player: Player) -> bool {
    let fixed: Vec<Option<usize>> = (0..g.len()).map(|v| if g.owner[v] == player && sol.winner[v] == player { sol.strategy[v] } else { None }).collect();
    if (0..g.len()).any(|v| g.owner[v] == player && sol.winner[v] == player && fixed[v].is_none()) {
        return false;
    }
    match player {
        Player::Eve => (0..g.len()).filter(|&v| sol.winner[v] == Player::Eve).all(|v| !odd_cycle_reachable(g, &fixed, v)),
        Player::Adam => {
            // Swap roles: shift priorities by one and let Adam play Eve.
            let dual = ParityGame {
                owner: g.owner.iter().map(|o| o.opponent()).collect(),
                priority: g.priority.iter().map(|p| p + 1).collect(),
                moves: g.moves.clone(),
                initial: g.initial,
            };
            (0..g.len()).filter(|&v| sol.winner[v] == Player::Adam).all(|v| !odd_cycle_reachable(&dual, &fixed, v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(owner: Player, priority: usize) -> ParityGame {
        ParityGame { owner: vec![owner], priority: vec![priority], moves: vec![vec![0]], initial: 0 }
    }

    #[test]
    fn self_loops() {
        assert_eq!(zielonka(&single(Player::Eve, 0)).winner, vec![Player::Eve]);
        assert_eq!(zielonka(&single(Player::Eve, 1)).winner, vec![Player::Adam]);
        assert_eq!(zielonka(&single(Player::Adam, 2)).winner, vec![Player::Eve]);
    }

    #[test]
    fn unreachable_odd_loop_is_ignored() {
        // 0 (Adam, 1) → 1 (Eve, 4) looping; 2 (Eve, 1) loops on its own
        let g = ParityGame { owner: vec![Player::Adam, Player::Eve, Player::Eve], priority: vec![1, 4, 1], moves: vec![vec![1], vec![1], vec![2]], initial: 0 };
        let expect = vec![Player::Eve, Player::Eve, Player::Adam];
        assert_eq!(brute_force_winners(&g), expect);
        assert_eq!(zielonka(&g).winner, expect);
    }

    #[test]
    fn eve_escapes_odd_loop() {
        // 0 (Eve, 1) loops or moves to 1 (Adam, 2) which loops.
        let g = ParityGame { owner: vec![Player::Eve, Player::Adam], priority: vec![1, 2], moves: vec![vec![0, 1], vec![1]], initial: 0 };
        let sol = zielonka(&g);
        assert_eq!(sol.winner, vec![Player::Eve, Player::Eve]);
        assert_eq!(sol.strategy[0], Some(1));
        assert!(strategy_wins(&g, &sol, Player::Eve));
        assert_eq!(brute_force_winners(&g), sol.winner);
    }

    #[test]
    fn dead_ends_lose() {
        let mut g = ParityGame { owner: vec![Player::Eve, Player::Adam], priority: vec![0, 0], moves: vec![vec![], vec![]], initial: 0 };
        g.close_dead_ends();
        assert_eq!(&zielonka(&g).winner[..2], &[Player::Adam, Player::Eve]);
    }
}
