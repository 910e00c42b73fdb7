//! Replaces URLs, e-mail addresses, mentions and phone numbers by tags.
//!
//! cargo run --example anonymize -- "text to scrub"

use selftrain_kit::augment::{anonymize, EMAIL_PATTERN, PHONE_PATTERN, URL_PATTERN, USER_PATTERN};

fn main() {
    let inputs: Vec<String> = match std::env::args().nth(1) {
        Some(t) => vec![t],
        None => vec![
            "Read https://truth.example.org/files before they delete it!".into(),
            "Mail whistle.blower@leaks.net or call +1 (555) 123-4567.".into(),
            "@insider says the moon landing was staged".into(),
        ],
    };
    for t in &inputs {
        println!("{t}\n  -> {}", anonymize(t));
    }
    println!("\npatterns applied in order:");
    for (name, p) in [("url", URL_PATTERN), ("email", EMAIL_PATTERN), ("user", USER_PATTERN), ("phone", PHONE_PATTERN)] {
        println!("  {name:<6} {p}");
    }
}
