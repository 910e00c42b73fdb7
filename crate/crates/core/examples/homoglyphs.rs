//! Swaps Latin letters for look-alike Cyrillic and Greek code points.
//!
//! cargo run --example homoglyphs -- "text" [rate] [seed]

use selftrain_kit::augment::{homoglyphify, ConfusablesTable};

fn main() {
    let mut args = std::env::args().skip(1);
    let text = args.next().unwrap_or_else(|| "Chemtrails are a cover story".into());
    let rate: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let table = ConfusablesTable::builtin();
    let out = homoglyphify(&text, table, rate, seed);
    println!("input:    {text}");
    println!("output:   {out}");
    println!("same bytes? {}", out == text);
    println!("restored: {}", table.restore(&out));

    let swapped: Vec<String> = text
        .chars()
        .zip(out.chars())
        .filter(|(a, b)| a != b)
        .map(|(a, b)| format!("{a}->U+{:04X}", b as u32))
        .collect();
    println!("{} of {} chars swapped: {}", swapped.len(), text.chars().count(), swapped.join(" "));
}
