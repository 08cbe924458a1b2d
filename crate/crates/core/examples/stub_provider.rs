//! Serves GeoJSON fixtures as an Overpass-style provider.
//!
//! cargo run -p xenakis-core --example stub_provider -- 8081 fixtures/grid.geojson

use xenakis_core::ingest::stub::StubProvider;

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let port: u16 = args.next().and_then(|p| p.parse().ok()).unwrap_or(8081);
    let docs = args.map(std::fs::read_to_string).collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&str> = docs.iter().map(String::as_str).collect();
    let stub = StubProvider::bind(&format!("127.0.0.1:{port}"), &refs)?;
    eprintln!("stub provider listening on {}", stub.url());
    loop {
        std::thread::park();
    }
}
