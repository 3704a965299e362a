pub mod baselines;
pub mod joint;
pub mod optimizer;
pub mod oracle;
pub mod rbf;
pub mod space;
pub mod workbench;
