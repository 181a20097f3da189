use seqren_core::derived::gen_interaction_up;
use seqren_core::parse::parse_structure;
use seqren_core::rules::{check_derivation_detailed, up_fragment};

fn main() {
    let d = gen_interaction_up(&parse_structure("{a}(a;e;<(c;e);c>;e)").unwrap());
    match check_derivation_detailed(&d, &up_fragment()) {
        Ok(()) => println!("OK"),
        Err(e) => {
            println!("FAIL: {e}");
        }
    }
}
