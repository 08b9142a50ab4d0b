pub mod init;
pub mod mlp;
pub mod nls;
pub mod quadratic;
