//! Size of the routing action space and the neighbourhood of one action.
//!
//! cargo run --example enumerate_actions

use dresg::action::{ActionSpace, HopsCombination};

fn main() {
    for rings in 1..=7 {
        let space = ActionSpace::enumerate(rings).unwrap();
        println!("R = {rings}: {} actions", space.len());
    }

    let space = ActionSpace::enumerate(3).unwrap();
    let reference: HopsCombination = "(1 2 1)".parse().unwrap();
    println!("\nsimilarity to {reference} (R = 3):");
    for a in space.actions() {
        let s = dresg::similarity(a, &reference).unwrap();
        println!("  {a}  index {:>2}  S = {s}", space.index_of(a).unwrap());
    }

    let best = space.index_of(&reference).unwrap();
    let nearest = space.most_similar_among(0..space.len(), best);
    let names: Vec<String> = nearest.iter().map(|&i| space.get(i).to_string()).collect();
    println!("most similar to {reference}: {}", names.join(", "));
}
