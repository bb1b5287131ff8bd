//! Annotate a dataset with strictly-pre-match Elo ratings and follow a few
//! player trajectories.

use courtcast::dataset::generate_synthetic;
use courtcast::features::{annotate_pre_match_elo, elo_expected, EloTable};

fn main() {
    let data = generate_synthetic(6, 4, 32, 7);
    let annotated = annotate_pre_match_elo(&data, 1500.0, 32.0);

    // Every annotation is the rating *before* the match: the first appearance
    // of any player carries the initial rating.
    let first = &annotated[0];
    println!(
        "first match: {} ({:.0}) vs {} ({:.0})",
        first.record.player1_id, first.elo1, first.record.player2_id, first.elo2
    );
    assert_eq!(first.elo1, 1500.0);
    assert_eq!(first.elo2, 1500.0);

    // Track the strongest finisher.
    let mut table = EloTable::new(1500.0, 32.0);
    for m in &annotated {
        let (winner, loser) = if m.record.victory == 1 {
            (&m.record.player1_id, &m.record.player2_id)
        } else {
            (&m.record.player2_id, &m.record.player1_id)
        };
        table.update(winner, loser).unwrap();
    }
    let mut finals: Vec<(String, f64)> = data
        .records
        .iter()
        .flat_map(|r| [r.player1_id.clone(), r.player2_id.clone()])
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .map(|id| {
            let r = table.rating(&id);
            (id, r)
        })
        .collect();
    finals.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("top five final ratings:");
    for (id, r) in finals.iter().take(5) {
        println!("  {id}: {r:.0}");
    }

    let (top, second) = (&finals[0], &finals[1]);
    println!(
        "expected score of {} against {}: {:.3}",
        top.0,
        second.0,
        elo_expected(top.1, second.1)
    );
}
