var base = "http://api.example.com/v1";

function listItems(token) {
  $.get(base + "/items", { access_token: token });
}
