use framecat::model::{finset_model, fingpd_model, validate_contextual};
use framecat::fib::{akl_structure, validate_fibcat};
use std::time::Instant;
fn main() {
    for (name, m) in [("finset", finset_model(3, 2).unwrap()), ("fingpd", fingpd_model(3, 2).unwrap())] {
        let t = Instant::now();
        let r = validate_contextual(&m);
        println!("{name} contextual: valid={} checked={} skips={} in {:?}", r.is_valid(), r.checked, r.incomplete.len(), t.elapsed());
        let t = Instant::now();
        match akl_structure(&m) {
            Ok(f) => {
                let r = validate_fibcat(&f);
                println!("{name} fibcat: valid={} checked={} skips={} in {:?}", r.is_valid(), r.checked, r.incomplete.len(), t.elapsed());
            }
            Err(e) => println!("{name} akl err: {e}"),
        }
    }
}
