//! Aggregates five-point human ratings into per-model perceptual scores.

use affect_score::io::{parse_ratings, ratings_to_csv};
use affect_score::perceptual::{aggregate_ratings, aggregate_ratings_per_dialogue};

const RATINGS: &str = "\
annotator_id,dialogue_id,model_id,er,en,rr
ann_0,d1,empathic,5,4,5
ann_1,d1,empathic,4,4,5
ann_0,d2,empathic,5,5,4
ann_0,d1,flat,2,3,4
ann_1,d1,flat,1,2,4
ann_0,d2,flat,2,2,3
";

fn main() -> affect_score::Result<()> {
    let records = parse_ratings("inline.csv".as_ref(), RATINGS)?;
    for (model, s) in aggregate_ratings(&records)? {
        println!(
            "{model:<9} ER {} EN {} RR {} -> ERS {} ({} records)",
            s.er, s.en, s.rr, s.ers, s.n_records
        );
    }
    for ((model, dialogue), s) in aggregate_ratings_per_dialogue(&records)? {
        println!("  {model}/{dialogue}: {}", s.ers);
    }
    print!("{}", ratings_to_csv(&records[..2]));
    Ok(())
}
