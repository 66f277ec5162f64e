// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use std::process::ExitCode;

fn main() -> ExitCode {
    let code = std::panic::catch_unwind(|| segflow::cli::run(std::env::args_os()))
        .unwrap_or(segflow::cli::EXIT_INTERNAL);
    ExitCode::from(code as u8)
}
