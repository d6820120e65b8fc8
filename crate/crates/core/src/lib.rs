pub mod imaging;
pub mod iris;
pub mod moments;
pub mod quadtree;
pub mod signature;
pub mod mvqc;
pub mod classifiers;
pub mod harness;
