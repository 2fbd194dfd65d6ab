fn main() {
    println!("noiselab");
}
