//! Label-based scoring with the default reasoning matrix and a custom one.

use affect_score::categorical::{categorical_ers_dialogue, categorical_ers_turn, ReasoningMatrix};
use affect_score::types::{CategoricalLabel, Dialogue, DialogueTurn, TurnTrajectories};

fn main() -> affect_score::Result<()> {
    let m = ReasoningMatrix::default();
    println!(
        "{:>8} {}",
        "",
        CategoricalLabel::ALL
            .map(|l| format!("{:>8}", l.name()))
            .join("")
    );
    for user in CategoricalLabel::ALL {
        let row: String = CategoricalLabel::ALL
            .iter()
            .map(|&machine| format!("{:>8.1}", m.get(user, machine)))
            .collect();
        println!(
            "{:>8} {row}   best reply: {}",
            user.name(),
            m.best_response(user).name()
        );
    }
    println!(
        "happy user, sad reply: {}",
        categorical_ers_turn(CategoricalLabel::Happy, CategoricalLabel::Sad, &m)
    );

    let flat = TurnTrajectories::from_samples(vec![0.0], vec![0.0], vec![0.0])?;
    let labelled = |u, r| DialogueTurn::new(flat.clone(), flat.clone(), Some(u), Some(r));
    let d = Dialogue::new(
        "d1",
        "m1",
        vec![
            labelled(CategoricalLabel::Happy, CategoricalLabel::Happy)?,
            labelled(CategoricalLabel::Sad, CategoricalLabel::Sad)?,
            labelled(CategoricalLabel::Angry, CategoricalLabel::Neutral)?,
        ],
    )?;
    println!(
        "dialogue score, default matrix: {}",
        categorical_ers_dialogue(&d, &m)?
    );

    // A stricter panel that only rewards mirroring.
    let mut cells = [[0.0; 4]; 4];
    for (i, row) in cells.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let strict = ReasoningMatrix::new(cells)?;
    println!(
        "dialogue score, identity matrix: {}",
        categorical_ers_dialogue(&d, &strict)?
    );
    println!(
        "{}",
        serde_json::to_string(&strict).expect("matrix serializes")
    );
    Ok(())
}
