function createUser(name) {
  $.post("https://api.example.com/v1/users", { name: name });
}
